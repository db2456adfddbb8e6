#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fsel/bridge.hpp"
#include "fsel/data.hpp"
#include "fsel/metrics.hpp"
#include "fsel/util.hpp"

namespace fsel {

struct DrsConfig {
  std::size_t dim = 8;
  std::vector<std::size_t> hidden{128, 64};
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

/// Embedding tables followed by a ReLU MLP with a single sigmoid output.
struct DrsModel {
  std::vector<std::string> field_names;
  std::size_t dim = 8;
  std::vector<Eigen::MatrixXd> embeddings;  // one (vocab x dim) table per field
  std::vector<DenseLayer> layers;           // hidden layers, then the output layer

  std::size_t num_fields() const { return embeddings.size(); }
  std::size_t input_width() const { return num_fields() * dim; }

  static DrsModel create(std::span<const std::string> fields, std::span<const std::size_t> vocab_sizes, const DrsConfig& config,
                         std::uint64_t seed) {
    if (fields.size() != vocab_sizes.size()) fail(ErrorKind::usage, "DrsModel::create: field/vocab count mismatch");
    if (fields.empty()) fail(ErrorKind::usage, "DrsModel::create: no fields");
    if (config.dim == 0) fail(ErrorKind::input, "embedding dimension must be >= 1");
    DrsModel m;
    m.field_names.assign(fields.begin(), fields.end());
    m.dim = config.dim;
    for (std::size_t n = 0; n < fields.size(); ++n) {
      Rng rng(derive_seed(seed, 0xe3b, n));
      Eigen::MatrixXd table(static_cast<Eigen::Index>(vocab_sizes[n]), static_cast<Eigen::Index>(config.dim));
      for (Eigen::Index i = 0; i < table.size(); ++i) table.data()[i] = uniform(rng, -0.01, 0.01);
      m.embeddings.push_back(std::move(table));
    }
    std::vector<std::size_t> widths{m.input_width()};
    widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
    widths.push_back(1);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      Rng rng(derive_seed(seed, 0x1a7, l));
      const double bound = std::sqrt(6.0 / static_cast<double>(widths[l]));
      DenseLayer layer{Eigen::MatrixXd(static_cast<Eigen::Index>(widths[l + 1]), static_cast<Eigen::Index>(widths[l])),
                       Eigen::VectorXd::Zero(static_cast<Eigen::Index>(widths[l + 1]))};
      for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = uniform(rng, -bound, bound);
      m.layers.push_back(std::move(layer));
    }
    return m;
  }

  /// Flat views over every parameter block, embeddings first.
  std::vector<std::span<double>> parameters() {
    std::vector<std::span<double>> out;
    for (auto& t : embeddings) out.emplace_back(t.data(), static_cast<std::size_t>(t.size()));
    for (auto& l : layers) {
      out.emplace_back(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
      out.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
    }
    return out;
  }

  std::vector<std::string> parameter_names() const {
    std::vector<std::string> out;
    for (const auto& f : field_names) out.push_back("embedding[" + f + "]");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      out.push_back("W" + std::to_string(l));
      out.push_back("b" + std::to_string(l));
    }
    return out;
  }
};

struct Gradients {
  std::vector<Eigen::MatrixXd> embeddings;
  std::vector<DenseLayer> layers;
  std::vector<double> bridge;  // empty unless a bridge context was used

  std::vector<std::span<double>> parameters() {
    std::vector<std::span<double>> out;
    for (auto& t : embeddings) out.emplace_back(t.data(), static_cast<std::size_t>(t.size()));
    for (auto& l : layers) {
      out.emplace_back(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
      out.emplace_back(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
    }
    return out;
  }

  double squared_norm() const {
    double s = 0.0;
    for (const auto& t : embeddings) s += t.squaredNorm();
    for (const auto& l : layers) s += l.weight.squaredNorm() + l.bias.squaredNorm();
    for (double g : bridge) s += g * g;
    return s;
  }
};

/// Inputs that switch the forward pass into bridge mode:
/// E' = h * normalize(E), with h computed from the rankings, mask and w.
struct BridgeContext {
  const std::vector<std::vector<std::size_t>>* positions = nullptr;  // K x N
  MaskMatrix mask;
  std::span<const double> w;
  double tau = 4.0;
};

struct BridgeActivations {
  std::vector<double> fused;
  std::vector<std::vector<double>> presence;
  std::vector<double> scores;
  NormalizedEmbeddings normalized;
};

struct Activations {
  Eigen::MatrixXd embedded;                // E
  std::optional<BridgeActivations> bridge;
  std::vector<Eigen::MatrixXd> inputs;     // inputs[l] feeds layer l; inputs[0] is E or E'
  Eigen::VectorXd logits;
  std::vector<double> pred;                // clamped sigmoid
};

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Row lookup: block n of each output row is row `index` of table n.
inline Eigen::MatrixXd embed(const DrsModel& model, const Batch& batch) {
  if (batch.num_fields != model.num_fields()) fail(ErrorKind::usage, "embed: batch has a different field count than the model");
  const auto d = static_cast<Eigen::Index>(model.dim);
  Eigen::MatrixXd E(static_cast<Eigen::Index>(batch.size()), static_cast<Eigen::Index>(model.input_width()));
  for (std::size_t b = 0; b < batch.size(); ++b) {
    for (std::size_t n = 0; n < model.num_fields(); ++n) {
      const auto idx = batch.at(b, n);
      if (idx >= static_cast<std::size_t>(model.embeddings[n].rows())) {
        fail(ErrorKind::data, "embedding lookup out of range for field '" + model.field_names[n] + "' (index " +
                                  std::to_string(idx) + ")");
      }
      E.block(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(n) * d, 1, d) =
          model.embeddings[n].row(static_cast<Eigen::Index>(idx));
    }
  }
  return E;
}

namespace detail {

inline void run_mlp(const DrsModel& model, Activations& acts) {
  const std::size_t n_layers = model.layers.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& layer = model.layers[l];
    const auto& x = acts.inputs[l];
    Eigen::MatrixXd z = x * layer.weight.transpose();
    z.rowwise() += layer.bias.transpose();
    if (!z.allFinite()) fail(ErrorKind::numeric, "non-finite activation at layer " + std::to_string(l));
    if (l + 1 < n_layers) {
      acts.inputs.push_back(z.cwiseMax(0.0));
    } else {
      acts.logits = z.col(0);
    }
  }
  acts.pred.resize(static_cast<std::size_t>(acts.logits.size()));
  for (Eigen::Index i = 0; i < acts.logits.size(); ++i) acts.pred[static_cast<std::size_t>(i)] = clamp_prob(sigmoid(acts.logits(i)));
}

}  // namespace detail

/// MLP over an already embedded (and possibly weighted) input.
inline std::vector<double> forward(const DrsModel& model, const Eigen::MatrixXd& input) {
  if (static_cast<std::size_t>(input.cols()) != model.input_width()) fail(ErrorKind::usage, "forward: input width mismatch");
  Activations acts;
  acts.inputs.push_back(input);
  detail::run_mlp(model, acts);
  return acts.pred;
}

/// Full forward pass keeping every intermediate needed by backward().
inline Activations forward_pass(const DrsModel& model, const Batch& batch, const BridgeContext* bridge = nullptr) {
  Activations acts;
  acts.embedded = embed(model, batch);
  if (bridge) {
    if (!bridge->positions) fail(ErrorKind::usage, "bridge context without rankings");
    BridgeActivations ba;
    ba.fused = fuse_weights(bridge->w, bridge->tau);
    ba.presence = presence(*bridge->positions, bridge->mask);
    ba.scores = feature_scores(*bridge->positions, bridge->mask, ba.fused);
    ba.normalized = normalize_embeddings(acts.embedded, model.dim);
    acts.inputs.push_back(weight_embeddings(ba.normalized.unit, ba.scores, model.dim));
    acts.bridge = std::move(ba);
  } else {
    acts.inputs.push_back(acts.embedded);
  }
  detail::run_mlp(model, acts);
  return acts;
}

/// Exact gradients of the mean BCE of `acts.pred` against the batch labels.
/// A clamped prediction contributes no gradient (the clamp is flat there).
inline Gradients backward(const DrsModel& model, const Batch& batch, const Activations& acts, const BridgeContext* bridge = nullptr) {
  if (acts.inputs.size() != model.layers.size() || static_cast<std::size_t>(acts.logits.size()) != batch.size()) {
    fail(ErrorKind::usage, "backward: activations do not match this model/batch");
  }
  if (bridge && !acts.bridge) fail(ErrorKind::usage, "backward: bridge context given but forward ran without it");
  const auto batch_n = static_cast<Eigen::Index>(batch.size());
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  Gradients g;
  g.layers.resize(model.layers.size());

  Eigen::MatrixXd dz(batch_n, 1);
  for (Eigen::Index i = 0; i < batch_n; ++i) {
    const double p = sigmoid(acts.logits(i));
    const bool clamped = p < kProbClamp || p > 1.0 - kProbClamp;
    dz(i, 0) = clamped ? 0.0 : (p - batch.labels[static_cast<std::size_t>(i)]) * inv_n;
  }

  Eigen::MatrixXd dx;
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    const auto& x = acts.inputs[l];
    g.layers[l].weight = dz.transpose() * x;
    g.layers[l].bias = dz.colwise().sum().transpose();
    dx = dz * model.layers[l].weight;
    if (l > 0) dz = dx.cwiseProduct((acts.inputs[l].array() > 0.0).cast<double>().matrix());
  }

  const auto d = static_cast<Eigen::Index>(model.dim);
  const auto n_fields = model.num_fields();
  Eigen::MatrixXd dE;
  if (bridge) {
    const auto& ba = *acts.bridge;
    std::vector<double> dh(n_fields, 0.0);
    Eigen::MatrixXd d_unit(dx.rows(), dx.cols());
    for (std::size_t n = 0; n < n_fields; ++n) {
      const auto cols = static_cast<Eigen::Index>(n) * d;
      dh[n] = dx.middleCols(cols, d).cwiseProduct(ba.normalized.unit.middleCols(cols, d)).sum();
      d_unit.middleCols(cols, d) = dx.middleCols(cols, d) * ba.scores[n];
    }
    dE = normalize_embeddings_backward(acts.embedded, ba.normalized.norms, d_unit, model.dim);
    std::vector<double> d_fused(ba.fused.size(), 0.0);
    for (std::size_t k = 0; k < ba.fused.size(); ++k) {
      for (std::size_t n = 0; n < n_fields; ++n) d_fused[k] += dh[n] * ba.presence[k][n];
    }
    g.bridge = fuse_weights_backward(ba.fused, d_fused, bridge->tau);
  } else {
    dE = std::move(dx);
  }

  g.embeddings.reserve(n_fields);
  for (const auto& t : model.embeddings) g.embeddings.push_back(Eigen::MatrixXd::Zero(t.rows(), t.cols()));
  for (std::size_t b = 0; b < batch.size(); ++b) {
    for (std::size_t n = 0; n < n_fields; ++n) {
      g.embeddings[n].row(static_cast<Eigen::Index>(batch.at(b, n))) +=
          dE.block(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(n) * d, 1, d);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Adam

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

/// Bias-corrected Adam update of every block in `params`. Moments are
/// allocated on the first call and must keep their shapes afterwards.
inline void adam_step(AdamState& state, std::span<const std::span<double>> params, std::span<const std::span<double>> grads) {
  if (params.size() != grads.size()) fail(ErrorKind::usage, "adam_step: parameter/gradient block count mismatch");
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.emplace_back(p.size(), 0.0);
      state.v.emplace_back(p.size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) fail(ErrorKind::usage, "adam_step: parameter block count changed");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].size() != grads[i].size() || params[i].size() != state.m[i].size()) {
      fail(ErrorKind::usage, "adam_step: shape mismatch in block " + std::to_string(i));
    }
  }
  ++state.step;
  const auto& c = state.config;
  const double t = static_cast<double>(state.step);
  const double corr1 = 1.0 - std::pow(c.beta1, t);
  const double corr2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& m = state.m[i];
    auto& v = state.v[i];
    auto p = params[i];
    auto g = grads[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
      p[j] -= c.lr * (m[j] / corr1) / (std::sqrt(v[j] / corr2) + c.eps);
    }
  }
}

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 4096;
  double lr = 1e-3;
  std::size_t patience = 2;
  std::uint64_t seed = 2024;
};

/// Bridge-mode training inputs: rankings as positions plus masking and fusion settings.
struct BridgeSetup {
  std::vector<std::vector<std::size_t>> positions;  // K x N
  double beta = 0.2;
  double tau = 4.0;
  std::vector<double> initial_w;  // defaults to zeros
  bool learn_w = true;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  Metrics valid;
  std::vector<double> w;  // bridge vector after the epoch, bridge mode only
};

struct TrainResult {
  DrsModel model;
  Metrics valid;
  Metrics test;
  std::size_t best_epoch = 0;  // 0 = initial model
  std::vector<EpochRecord> history;
  std::vector<double> bridge_w;
};

inline constexpr std::size_t kEvalChunk = 8192;

/// Predictions for every row of a split, in stored order. In bridge mode no
/// mask is applied, so h = 1 for every field.
inline std::vector<double> predict(const DrsModel& model, const EncodedDataset& ds, Split which, const BridgeSetup* bridge = nullptr,
                                   std::span<const double> w = {}) {
  const auto rows = ds.rows_in(which);
  std::vector<double> out;
  out.reserve(rows.size());
  std::optional<BridgeContext> ctx;
  if (bridge) {
    ctx = BridgeContext{&bridge->positions, MaskMatrix::none(bridge->positions.size(), model.num_fields()), w, bridge->tau};
  }
  for (std::size_t start = 0; start < rows.size(); start += kEvalChunk) {
    const auto len = std::min(kEvalChunk, rows.size() - start);
    const auto batch = gather(ds, std::span<const std::size_t>(rows).subspan(start, len));
    const auto acts = forward_pass(model, batch, ctx ? &*ctx : nullptr);
    out.insert(out.end(), acts.pred.begin(), acts.pred.end());
  }
  return out;
}

inline std::vector<double> split_labels(const EncodedDataset& ds, Split which) {
  std::vector<double> out;
  for (auto r : ds.rows_in(which)) out.push_back(ds.labels[r]);
  return out;
}

inline Metrics evaluate(const DrsModel& model, const EncodedDataset& ds, Split which, const BridgeSetup* bridge = nullptr,
                        std::span<const double> w = {}) {
  const auto pred = predict(model, ds, which, bridge, w);
  const auto labels = split_labels(ds, which);
  return evaluate(pred, labels);
}

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Adam on mean BCE with early stopping on validation AUC. Returns the
/// checkpoint with the best validation AUC (the initial model counts as epoch 0).
inline TrainResult fit(DrsModel model, const EncodedDataset& ds, const TrainConfig& config, const BridgeSetup* bridge = nullptr,
                       const EpochCallback& on_epoch = {}) {
  if (ds.count(Split::train) == 0 || ds.count(Split::valid) == 0) fail(ErrorKind::data, "training needs non-empty train and valid splits");
  std::vector<double> w;
  if (bridge) {
    if (bridge->positions.empty()) fail(ErrorKind::usage, "bridge training without rankings");
    w = bridge->initial_w.empty() ? std::vector<double>(bridge->positions.size(), 0.0) : bridge->initial_w;
    if (w.size() != bridge->positions.size()) fail(ErrorKind::usage, "bridge vector length differs from expert count");
  }

  TrainResult result;
  result.valid = evaluate(model, ds, Split::valid, bridge, w);
  result.model = model;
  result.bridge_w = w;

  AdamState adam;
  adam.config.lr = config.lr;
  Rng mask_rng(derive_seed(config.seed, 0x3a5c));
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto train_batches = batches(ds, Split::train, config.batch_size, config.seed, epoch);
    double loss_sum = 0.0;
    for (const auto& batch : train_batches) {
      std::optional<BridgeContext> ctx;
      if (bridge) {
        ctx = BridgeContext{&bridge->positions, sample_mask(model.num_fields(), bridge->positions.size(), bridge->beta, mask_rng), w,
                            bridge->tau};
      }
      const auto acts = forward_pass(model, batch, ctx ? &*ctx : nullptr);
      loss_sum += bce_loss(acts.pred, batch.labels) * static_cast<double>(batch.size());
      auto grads = backward(model, batch, acts, ctx ? &*ctx : nullptr);
      auto params = model.parameters();
      auto gblocks = grads.parameters();
      if (bridge && bridge->learn_w) {
        params.emplace_back(w.data(), w.size());
        gblocks.emplace_back(grads.bridge.data(), grads.bridge.size());
      }
      adam_step(adam, params, gblocks);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(ds.count(Split::train));
    rec.valid = evaluate(model, ds, Split::valid, bridge, w);
    rec.w = w;
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (rec.valid.auc > result.valid.auc) {
      result.valid = rec.valid;
      result.model = model;
      result.bridge_w = w;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  if (ds.count(Split::test) > 0) result.test = evaluate(result.model, ds, Split::test, bridge, result.bridge_w);
  return result;
}

/// Plain backbone training from a fresh seeded model.
inline TrainResult train(const EncodedDataset& ds, const DrsConfig& model_config, const TrainConfig& config,
                         const EpochCallback& on_epoch = {}) {
  auto model = DrsModel::create(ds.field_names, ds.vocab_sizes(), model_config, config.seed);
  return fit(std::move(model), ds, config, nullptr, on_epoch);
}

}  // namespace fsel

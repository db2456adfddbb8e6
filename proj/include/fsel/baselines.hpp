#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fsel/bridge_training.hpp"
#include "fsel/data.hpp"
#include "fsel/drs.hpp"
#include "fsel/experts.hpp"
#include "fsel/rank.hpp"

namespace fsel {

enum class Method { permutation, self, self_wo_mm, self_wo_ip, self_wo_bv };

inline constexpr std::pair<Method, const char*> kMethodNames[] = {{Method::permutation, "permutation"},
                                                                  {Method::self, "self"},
                                                                  {Method::self_wo_mm, "self_wo_mm"},
                                                                  {Method::self_wo_ip, "self_wo_ip"},
                                                                  {Method::self_wo_bv, "self_wo_bv"}};

inline const char* method_name(Method m) {
  for (const auto& [method, name] : kMethodNames) {
    if (method == m) return name;
  }
  return "?";
}

inline Method parse_method(std::string_view name) {
  std::string valid;
  for (const auto& [method, label] : kMethodNames) {
    if (name == label) return method;
    valid += (valid.empty() ? "" : ", ") + std::string(label);
  }
  fail(ErrorKind::usage, "unknown method '" + std::string(name) + "' (valid: " + valid + ")");
}

inline constexpr std::size_t kDefaultPermutationRepeats = 5;

/// Mean validation-AUC drop when one field's column is shuffled across the
/// split, per field in dataset order. Each (field, repeat) owns a generator.
inline std::vector<double> permutation_importance(const DrsModel& model, const EncodedDataset& ds,
                                                  std::size_t n_repeats = kDefaultPermutationRepeats, std::uint64_t seed = 2024) {
  if (n_repeats == 0) fail(ErrorKind::input, "n_repeats must be >= 1");
  const auto rows = ds.rows_in(Split::valid);
  if (rows.empty()) fail(ErrorKind::data, "permutation importance needs a non-empty valid split");
  const auto base_batch = gather(ds, rows);
  const auto predict_batch = [&](const Batch& batch) {
    std::vector<double> out;
    out.reserve(batch.size());
    for (std::size_t start = 0; start < batch.size(); start += kEvalChunk) {
      const auto len = std::min(kEvalChunk, batch.size() - start);
      Batch chunk;
      chunk.num_fields = batch.num_fields;
      chunk.indices.assign(batch.indices.begin() + static_cast<std::ptrdiff_t>(start * batch.num_fields),
                           batch.indices.begin() + static_cast<std::ptrdiff_t>((start + len) * batch.num_fields));
      chunk.labels.assign(batch.labels.begin() + static_cast<std::ptrdiff_t>(start),
                          batch.labels.begin() + static_cast<std::ptrdiff_t>(start + len));
      const auto acts = forward_pass(model, chunk);
      out.insert(out.end(), acts.pred.begin(), acts.pred.end());
    }
    return out;
  };
  const double baseline = auc(predict_batch(base_batch), base_batch.labels);

  std::vector<double> scores(ds.num_fields(), 0.0);
  for (std::size_t n = 0; n < ds.num_fields(); ++n) {
    double drop = 0.0;
    for (std::size_t r = 0; r < n_repeats; ++r) {
      Batch permuted = base_batch;
      std::vector<std::uint32_t> column(permuted.size());
      for (std::size_t b = 0; b < permuted.size(); ++b) column[b] = permuted.at(b, n);
      Rng rng(derive_seed(seed, 0x9e7, n, r));
      shuffle(column, rng);
      for (std::size_t b = 0; b < permuted.size(); ++b) permuted.indices[b * permuted.num_fields + n] = column[b];
      drop += baseline - auc(predict_batch(permuted), permuted.labels);
    }
    scores[n] = drop / static_cast<double>(n_repeats);
  }
  return scores;
}

struct SelectionRow {
  std::size_t d = 0;
  std::vector<std::string> selected;
  Metrics valid;
  Metrics test;
};

struct BaselineReport {
  Method method = Method::self;
  std::vector<std::string> fields;  // dataset order
  std::vector<double> scores;       // aligned with fields
  std::vector<std::string> order;   // descending score
  std::vector<SelectionRow> rows;   // one per requested d
  std::vector<double> fused;        // expert weights, when a bridge/fusion was involved
  SelectionMatrix selection;        // rankings that fed the method (empty for permutation)
};

struct PipelineConfig {
  BridgeConfig bridge;                // also carries model and training settings
  std::vector<std::size_t> d_values;  // retrain once per entry; empty = ranking only
  std::size_t n_repeats = kDefaultPermutationRepeats;
};

struct AblationInputs {
  const EncodedDataset* dataset = nullptr;
  const DatasetSchema* schema = nullptr;
  std::optional<SelectionMatrix> selection;  // self, self_wo_bv (and self_wo_mm when no experts are given)
  std::vector<Expert*> experts;              // self_wo_ip; self_wo_mm uses the first, the designated strongest
  ResponseCache* cache = nullptr;
};

namespace detail {

inline void retrain_rows(BaselineReport& report, const ImportanceRanking& ranking, const EncodedDataset& ds,
                         const PipelineConfig& config) {
  for (auto d : config.d_values) {
    const auto selected = select_top_d(ranking, d);
    const auto res = retrain_eval(ds, selected, config.bridge.model, config.bridge.train);
    report.rows.push_back({d, res.selected, res.valid, res.test});
  }
}

inline void fill_scores(BaselineReport& report, const ImportanceRanking& ranking) {
  report.fields = ranking.fields;
  report.scores = ranking.h_star;
  report.order = ranking.order;
}

}  // namespace detail

/// Runs one method end to end: ranking, then a retrain for every requested d.
/// self_wo_mm keeps a single ranking, whose fused weight is 1 for any bridge
/// vector, so no bridge training is needed for it.
inline BaselineReport run_ablation(Method method, const AblationInputs& in, const PipelineConfig& config) {
  if (!in.dataset) fail(ErrorKind::config, "ablation needs a dataset");
  const auto& ds = *in.dataset;
  BaselineReport report;
  report.method = method;

  switch (method) {
    case Method::permutation: {
      const auto trained = train(ds, config.bridge.model, config.bridge.train);
      const auto scores = permutation_importance(trained.model, ds, config.n_repeats, config.bridge.train.seed);
      const auto ranking = make_ranking(ds.field_names, scores);
      detail::fill_scores(report, ranking);
      detail::retrain_rows(report, ranking, ds, config);
      return report;
    }
    case Method::self:
    case Method::self_wo_ip: {
      SelectionMatrix s;
      if (method == Method::self_wo_ip) {
        if (in.experts.empty() || !in.schema) fail(ErrorKind::config, "self_wo_ip needs experts and a schema");
        s = collect(in.experts, *in.schema, in.cache, false, RankingMode::one_shot);
      } else if (in.selection) {
        s = *in.selection;
      } else if (!in.experts.empty() && in.schema) {
        s = collect(in.experts, *in.schema, in.cache);
      } else {
        fail(ErrorKind::config, "self needs a selection matrix or experts");
      }
      const auto bridge = train_bridge(ds, s, config.bridge);
      const auto ranking = final_scores(s, ds.field_names, bridge.w, config.bridge.tau);
      detail::fill_scores(report, ranking);
      report.fused = bridge.fused;
      report.selection = std::move(s);
      detail::retrain_rows(report, ranking, ds, config);
      return report;
    }
    case Method::self_wo_mm: {
      SelectionMatrix s;
      if (!in.experts.empty()) {
        if (!in.schema) fail(ErrorKind::config, "self_wo_mm needs a schema to query its expert");
        s.rows.push_back(run_iteration(*in.experts.front(), *in.schema, in.cache));
      } else if (in.selection && in.selection->num_experts() > 0) {
        s.rows.push_back(in.selection->rows.front());
      } else {
        fail(ErrorKind::config, "self_wo_mm needs an expert or a selection matrix");
      }
      const auto ranking = final_scores(s, ds.field_names, std::vector<double>{0.0}, config.bridge.tau);
      detail::fill_scores(report, ranking);
      report.fused = {1.0};
      report.selection = std::move(s);
      detail::retrain_rows(report, ranking, ds, config);
      return report;
    }
    case Method::self_wo_bv: {
      if (!in.selection) fail(ErrorKind::config, "self_wo_bv needs a selection matrix");
      const auto ranking = fuse_uniform(*in.selection, ds.field_names);
      detail::fill_scores(report, ranking);
      report.fused.assign(in.selection->num_experts(), 1.0 / static_cast<double>(in.selection->num_experts()));
      report.selection = *in.selection;
      detail::retrain_rows(report, ranking, ds, config);
      return report;
    }
  }
  fail(ErrorKind::usage, "unhandled method");
}

inline void to_json(nlohmann::json& j, const SelectionRow& r) {
  j = nlohmann::json{{"d", r.d}, {"selected", r.selected}, {"valid", r.valid}, {"test", r.test}};
}

inline void to_json(nlohmann::json& j, const BaselineReport& r) {
  nlohmann::json scores = nlohmann::json::array();
  for (std::size_t i = 0; i < r.order.size(); ++i) {
    const auto it = std::find(r.fields.begin(), r.fields.end(), r.order[i]);
    scores.push_back({{"field", r.order[i]}, {"score", r.scores[static_cast<std::size_t>(it - r.fields.begin())]}, {"rank", i + 1}});
  }
  j = nlohmann::json{{"method", method_name(r.method)}, {"scores", scores}, {"rows", r.rows}};
  if (!r.fused.empty()) j["fused_weights"] = r.fused;
  if (!r.selection.rows.empty()) j["selection"] = r.selection;
}

/// Comparison table: one line per (method, d).
inline void render_comparison(std::ostream& out, std::span<const BaselineReport> reports) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-12s %4s  %-9s %-9s %-9s %-9s\n", "method", "d", "valid_auc", "valid_ll", "test_auc", "test_ll");
  out << buf;
  for (const auto& r : reports) {
    for (const auto& row : r.rows) {
      std::snprintf(buf, sizeof(buf), "%-12s %4zu  %.5f   %.5f   %.5f   %.5f\n", method_name(r.method), row.d, row.valid.auc,
                    row.valid.logloss, row.test.auc, row.test.logloss);
      out << buf;
    }
  }
}

}  // namespace fsel

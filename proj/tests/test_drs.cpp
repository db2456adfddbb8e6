#include <gtest/gtest.h>

#include <cmath>

#include "fsel/drs.hpp"
#include "gradcheck.hpp"

namespace fsel {
namespace {

Batch make_batch(std::size_t num_fields, std::vector<std::uint32_t> indices, std::vector<double> labels) {
  return Batch{num_fields, std::move(indices), std::move(labels)};
}

TEST(Embed, RowLookupAndWidth) {
  std::vector<std::string> fields;
  std::vector<std::size_t> vocab;
  for (int i = 0; i < 9; ++i) {
    fields.push_back("f" + std::to_string(i));
    vocab.push_back(5);
  }
  const auto model = DrsModel::create(fields, vocab, DrsConfig{}, 1);
  EXPECT_EQ(model.input_width(), 72u);
  std::vector<std::uint32_t> idx{0, 1, 2, 3, 4, 0, 1, 2, 3, 4, 3, 2, 1, 0, 4, 3, 2, 1};
  const auto E = embed(model, make_batch(9, idx, {0, 1}));
  ASSERT_EQ(E.rows(), 2);
  ASSERT_EQ(E.cols(), 72);
  for (int b = 0; b < 2; ++b) {
    for (int n = 0; n < 9; ++n) {
      const auto row = model.embeddings[static_cast<std::size_t>(n)].row(idx[static_cast<std::size_t>(b * 9 + n)]);
      EXPECT_EQ(E.block(b, n * 8, 1, 8), row);
    }
  }
  EXPECT_THROW(embed(model, make_batch(9, std::vector<std::uint32_t>(9, 5), {0})), Error);
}

TEST(Forward, ZeroWeightsGiveOneHalf) {
  const std::vector<std::string> fields{"a", "b"};
  const std::vector<std::size_t> vocab{3, 3};
  auto model = DrsModel::create(fields, vocab, DrsConfig{4, {8}}, 2);
  for (auto& l : model.layers) {
    l.weight.setZero();
    l.bias.setZero();
  }
  const auto acts = forward_pass(model, make_batch(2, {1, 2, 0, 1}, {0, 1}));
  EXPECT_DOUBLE_EQ(acts.pred[0], 0.5);
  EXPECT_DOUBLE_EQ(acts.pred[1], 0.5);
}

TEST(Forward, HandComputedTwoByTwo) {
  const std::vector<std::string> fields{"a"};
  const std::vector<std::size_t> vocab{1};
  auto model = DrsModel::create(fields, vocab, DrsConfig{2, {2}}, 3);
  model.layers[0].weight << 1.0, -1.0, 0.5, 2.0;
  model.layers[0].bias << 0.0, -1.0;
  model.layers[1].weight << 1.0, 1.0;
  model.layers[1].bias << 0.0;
  Eigen::MatrixXd x(1, 2);
  x << 1.0, 2.0;
  // hidden pre-activation: [1 - 2, 0.5 + 4 - 1] = [-1, 3.5]; ReLU -> [0, 3.5]
  EXPECT_NEAR(forward(model, x)[0], 1.0 / (1.0 + std::exp(-3.5)), 1e-15);
  x << -1.0, 0.0;
  // [-1, -1.5] -> [0, 0] -> 0.5
  EXPECT_DOUBLE_EQ(forward(model, x)[0], 0.5);
}

TEST(Backward, MatchesFiniteDifferencesWithoutBridge) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = testing::gradient_check(seed, false);
    for (std::size_t i = 0; i < r.groups.size(); ++i) EXPECT_LE(r.rel_errors[i], 1e-4) << r.groups[i] << " seed " << seed;
    EXPECT_LE(r.kinks * 100, r.coordinates) << "seed " << seed;
  }
}

TEST(Backward, MatchesFiniteDifferencesWithBridge) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = testing::gradient_check(seed, true);
    for (std::size_t i = 0; i < r.groups.size(); ++i) EXPECT_LE(r.rel_errors[i], 1e-4) << r.groups[i] << " seed " << seed;
    EXPECT_LE(r.kinks * 100, r.coordinates) << "seed " << seed;
  }
}

TEST(Backward, SaturatedOutputGivesTinyGradient) {
  const std::vector<std::string> fields{"a", "b"};
  const std::vector<std::size_t> vocab{3, 3};
  auto model = DrsModel::create(fields, vocab, DrsConfig{4, {8}}, 4);
  model.layers.back().bias(0) = 40.0;
  const auto batch = make_batch(2, {1, 2, 0, 1}, {0, 1});
  const auto acts = forward_pass(model, batch);
  EXPECT_DOUBLE_EQ(acts.pred[0], 1.0 - kProbClamp);
  const auto g = backward(model, batch, acts);
  EXPECT_LT(std::sqrt(g.squared_norm()), 1e-5);
}

TEST(Backward, FullyMaskedFieldGetsNoEmbeddingGradient) {
  const std::vector<std::string> fields{"a", "b", "c"};
  const std::vector<std::size_t> vocab{3, 3, 3};
  auto model = DrsModel::create(fields, vocab, DrsConfig{4, {8}}, 5);
  const std::vector<std::vector<std::size_t>> positions{{0, 1, 2}};  // c sits last
  const std::vector<double> w{0.0};
  const BridgeContext ctx{&positions, MaskMatrix{1, 3, 1, 0.4}, w, 4.0};
  const auto batch = make_batch(3, {1, 1, 1, 2, 2, 2}, {0, 1});
  const auto acts = forward_pass(model, batch, &ctx);
  EXPECT_DOUBLE_EQ(acts.bridge->scores[2], 0.0);
  const auto g = backward(model, batch, acts, &ctx);
  EXPECT_EQ(g.embeddings[2].squaredNorm(), 0.0);
  EXPECT_GT(g.embeddings[0].squaredNorm(), 0.0);
}

TEST(Adam, FirstStepHandFormula) {
  std::vector<double> p{1.0, -2.0, 0.5};
  std::vector<double> g{0.3, -5.0, 0.0};
  std::vector<std::span<double>> params{std::span<double>(p)};
  std::vector<std::span<double>> grads{std::span<double>(g)};
  AdamState st;
  adam_step(st, params, grads);
  // Bias-corrected first step moves by lr * g / (|g| + eps); zero gradient leaves the value.
  EXPECT_NEAR(p[0], 1.0 - 1e-3 * 0.3 / (0.3 + 1e-8), 1e-15);
  EXPECT_NEAR(p[1], -2.0 + 1e-3 * 5.0 / (5.0 + 1e-8), 1e-15);
  EXPECT_DOUBLE_EQ(p[2], 0.5);
  EXPECT_EQ(st.step, 1u);

  std::vector<double> q{1.0};
  std::vector<double> gq{0.3};
  std::vector<std::span<double>> pq{std::span<double>(q)}, gqs{std::span<double>(gq)};
  AdamState st2;
  adam_step(st2, pq, gqs);
  adam_step(st2, pq, gqs);
  // Second step with the same gradient: m_hat = 0.3, v_hat = 0.09.
  EXPECT_NEAR(q[0], 1.0 - 2e-3 * 0.3 / (0.3 + 1e-8), 1e-14);
}

TEST(Adam, RejectsShapeChanges) {
  std::vector<double> p{1.0, 2.0};
  std::vector<double> g{1.0};
  std::vector<std::span<double>> params{std::span<double>(p)};
  std::vector<std::span<double>> grads{std::span<double>(g)};
  AdamState st;
  EXPECT_THROW(adam_step(st, params, grads), Error);
}

EncodedDataset small_split(std::uint64_t seed, std::size_t n = 6000) {
  auto syn = synthesize(4, 2, 0, n, seed);
  return split(std::move(syn.dataset), {0.7, 0.2, 0.1}, seed);
}

TEST(Train, ZeroEpochsReturnsInitialModel) {
  const auto ds = small_split(1, 600);
  TrainConfig cfg;
  cfg.epochs = 0;
  const auto res = train(ds, DrsConfig{4, {8}}, cfg);
  EXPECT_EQ(res.best_epoch, 0u);
  EXPECT_TRUE(res.history.empty());
  const auto fresh = DrsModel::create(ds.field_names, ds.vocab_sizes(), DrsConfig{4, {8}}, cfg.seed);
  EXPECT_EQ(res.model.layers[0].weight, fresh.layers[0].weight);
}

TEST(Train, LearnsSyntheticSignal) {
  const auto ds = small_split(2);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 256;
  cfg.lr = 5e-3;
  const auto res = train(ds, DrsConfig{}, cfg);
  EXPECT_GT(res.test.auc, 0.55);
  EXPECT_LE(res.history.size(), 3u);
}

TEST(Train, DeterministicUnderSeed) {
  const auto ds = small_split(3, 2000);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 128;
  const auto a = train(ds, DrsConfig{4, {8}}, cfg);
  const auto b = train(ds, DrsConfig{4, {8}}, cfg);
  EXPECT_EQ(a.model.layers[0].weight, b.model.layers[0].weight);
  EXPECT_EQ(a.valid.auc, b.valid.auc);
}

TEST(Train, EarlyStoppingHonoursPatience) {
  const auto ds = small_split(4, 2000);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.batch_size = 64;
  cfg.lr = 0.05;
  cfg.patience = 1;
  const auto res = train(ds, DrsConfig{4, {8}}, cfg);
  ASSERT_LT(res.history.size(), 50u);
  // The run stopped right after the first epoch that failed to improve.
  const auto last = res.history.back().epoch;
  EXPECT_EQ(last, res.best_epoch + cfg.patience);
  for (const auto& h : res.history) EXPECT_LE(h.valid.auc, res.valid.auc);
}

}  // namespace
}  // namespace fsel

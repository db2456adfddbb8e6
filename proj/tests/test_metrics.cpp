#include <gtest/gtest.h>

#include <cmath>

#include "fsel/metrics.hpp"
#include "oracles.hpp"

namespace fsel {
namespace {

TEST(BceLoss, HandValues) {
  const std::vector<double> half{0.5}, one{1.0};
  EXPECT_NEAR(bce_loss(half, one), std::log(2.0), 1e-12);
  EXPECT_NEAR(bce_loss(std::vector<double>{0.9, 0.2}, std::vector<double>{1.0, 0.0}), 0.164252033486018, 1e-12);
}

TEST(BceLoss, ClampKeepsLossFinite) {
  const double at_one = bce_loss(std::vector<double>{1.0}, std::vector<double>{1.0});
  EXPECT_GT(at_one, 0.0);
  EXPECT_LT(at_one, 2e-7);
  EXPECT_TRUE(std::isfinite(bce_loss(std::vector<double>{0.0}, std::vector<double>{1.0})));
  EXPECT_THROW(bce_loss(std::vector<double>{0.5}, std::vector<double>{1.0, 0.0}), Error);
}

TEST(Auc, Extremes) {
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<double>{0, 0, 1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.3, 0.3, 0.3, 0.3}, std::vector<double>{0, 1, 0, 1}), 0.5);
  EXPECT_DOUBLE_EQ(auc(std::vector<double>{0.9, 0.8, 0.2}, std::vector<double>{0, 0, 1}), 0.0);
}

TEST(Auc, SingleClassIsUndefined) {
  try {
    auc(std::vector<double>{0.1, 0.2}, std::vector<double>{1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("AUC undefined"), std::string::npos);
  }
}

TEST(Auc, MatchesPairwiseOracleWithTies) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> pred(200), label(200);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      // Coarse grid to force many ties.
      pred[i] = static_cast<double>(uniform_index(rng, 20)) / 20.0;
      label[i] = static_cast<double>(uniform_index(rng, 2));
    }
    label[0] = 0.0;
    label[1] = 1.0;
    EXPECT_NEAR(auc(pred, label), oracle::pairwise_auc(pred, label), 1e-12);
  }
}

TEST(Logloss, SharesDefinitionWithBce) {
  Rng rng(3);
  std::vector<double> pred(64), label(64);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    pred[i] = uniform01(rng);
    label[i] = static_cast<double>(uniform_index(rng, 2));
  }
  EXPECT_NEAR(logloss(pred, label), bce_loss(pred, label), 1e-12);
}

}  // namespace
}  // namespace fsel

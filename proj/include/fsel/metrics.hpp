#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "fsel/util.hpp"

namespace fsel {

inline constexpr double kProbClamp = 1e-7;

inline double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

/// Mean binary cross-entropy. Predictions are clamped so the result is always finite.
inline double bce_loss(std::span<const double> pred, std::span<const double> label) {
  if (pred.size() != label.size()) fail(ErrorKind::usage, "bce_loss: length mismatch");
  if (pred.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = clamp_prob(pred[i]);
    sum -= label[i] * std::log(p) + (1.0 - label[i]) * std::log(1.0 - p);
  }
  return sum / static_cast<double>(pred.size());
}

inline double logloss(std::span<const double> pred, std::span<const double> label) { return bce_loss(pred, label); }

/// Mann-Whitney AUC; tied predictions share their average rank.
inline double auc(std::span<const double> pred, std::span<const double> label) {
  if (pred.size() != label.size()) fail(ErrorKind::usage, "auc: length mismatch");
  const std::size_t n = pred.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pred[a] < pred[b]; });

  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && pred[order[j]] == pred[order[i]]) ++j;
    // 1-based ranks i+1..j averaged.
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (label[order[k]] > 0.5) {
        pos_rank_sum += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) fail(ErrorKind::numeric, "AUC undefined: labels contain a single class");
  const double np = static_cast<double>(n_pos);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

struct Metrics {
  double auc = 0.0;
  double logloss = 0.0;
};

inline Metrics evaluate(std::span<const double> pred, std::span<const double> label) {
  return {auc(pred, label), logloss(pred, label)};
}

}  // namespace fsel

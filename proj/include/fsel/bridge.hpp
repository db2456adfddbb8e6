#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fsel/selection.hpp"
#include "fsel/util.hpp"

namespace fsel {

/// Suffix mask shared by all K rankings: position t is kept iff t < N - r.
struct MaskMatrix {
  std::size_t num_experts = 0;
  std::size_t num_positions = 0;
  std::size_t masked = 0;  // r
  double max_ratio = 0.0;  // beta

  bool keep(std::size_t /*expert*/, std::size_t t) const { return t + masked < num_positions; }

  std::vector<std::vector<int>> dense() const {
    std::vector<std::vector<int>> m(num_experts, std::vector<int>(num_positions));
    for (std::size_t k = 0; k < num_experts; ++k) {
      for (std::size_t t = 0; t < num_positions; ++t) m[k][t] = keep(k, t) ? 1 : 0;
    }
    return m;
  }

  static MaskMatrix none(std::size_t num_experts, std::size_t num_positions) {
    return {num_experts, num_positions, 0, 0.0};
  }
};

/// Largest admissible r for a given N and beta (the continuous bound truncated).
inline std::size_t max_masked(std::size_t num_positions, double beta) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(num_positions) * beta + 1e-12));
}

/// r is drawn uniformly from {0, ..., floor(N * beta)}, once per call.
inline MaskMatrix sample_mask(std::size_t num_positions, std::size_t num_experts, double beta, Rng& rng) {
  if (!(beta >= 0.0 && beta <= 1.0)) fail(ErrorKind::input, "masking ratio beta must lie in [0, 1]");
  const std::size_t r_max = max_masked(num_positions, beta);
  const auto r = static_cast<std::size_t>(uniform_index(rng, r_max + 1));
  return {num_experts, num_positions, r, beta};
}

/// softmax(w * exp(tau)), max-subtracted.
inline std::vector<double> fuse_weights(std::span<const double> w, double tau) {
  if (w.empty()) fail(ErrorKind::usage, "fuse_weights: empty bridge vector");
  const double scale = std::exp(tau);
  std::vector<double> z(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) z[k] = w[k] * scale;
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (auto& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (auto& v : z) v /= sum;
  return z;
}

/// Gradient of a loss w.r.t. w given its gradient w.r.t. the fused weights.
inline std::vector<double> fuse_weights_backward(std::span<const double> fused, std::span<const double> grad_fused, double tau) {
  double dot = 0.0;
  for (std::size_t k = 0; k < fused.size(); ++k) dot += fused[k] * grad_fused[k];
  const double scale = std::exp(tau);
  std::vector<double> out(fused.size());
  for (std::size_t k = 0; k < fused.size(); ++k) out[k] = scale * fused[k] * (grad_fused[k] - dot);
  return out;
}

/// presence[k][n] = m^k at the position of field n in ranking k (0 or 1).
inline std::vector<std::vector<double>> presence(const std::vector<std::vector<std::size_t>>& positions, const MaskMatrix& mask) {
  std::vector<std::vector<double>> out(positions.size());
  for (std::size_t k = 0; k < positions.size(); ++k) {
    out[k].resize(positions[k].size());
    for (std::size_t n = 0; n < positions[k].size(); ++n) out[k][n] = mask.keep(k, positions[k][n]) ? 1.0 : 0.0;
  }
  return out;
}

/// h_n = sum_k fused_k * m^k(position of n in ranking k).
inline std::vector<double> feature_scores(const std::vector<std::vector<std::size_t>>& positions, const MaskMatrix& mask,
                                          std::span<const double> fused) {
  if (positions.size() != fused.size() || positions.size() != mask.num_experts) {
    fail(ErrorKind::usage, "feature_scores: expert count mismatch");
  }
  const std::size_t n_fields = positions.empty() ? 0 : positions.front().size();
  if (n_fields != mask.num_positions) fail(ErrorKind::usage, "feature_scores: position count mismatch");
  std::vector<double> h(n_fields, 0.0);
  for (std::size_t k = 0; k < positions.size(); ++k) {
    for (std::size_t n = 0; n < n_fields; ++n) {
      if (mask.keep(k, positions[k][n])) h[n] += fused[k];
    }
  }
  return h;
}

inline std::vector<double> feature_scores(const SelectionMatrix& s, std::span<const std::string> fields, const MaskMatrix& mask,
                                          std::span<const double> fused) {
  return feature_scores(field_positions(s, fields), mask, fused);
}

// ---------------------------------------------------------------------------
// Embedding normalization and weighting. E is batch x (N * dim) with field n
// occupying columns [n * dim, (n + 1) * dim).

inline constexpr double kNormEps = 1e-12;

struct NormalizedEmbeddings {
  Eigen::MatrixXd unit;   // E-hat
  Eigen::MatrixXd norms;  // batch x N, the L2 norm of each raw block
};

inline NormalizedEmbeddings normalize_embeddings(const Eigen::MatrixXd& E, std::size_t dim) {
  const auto n_fields = static_cast<Eigen::Index>(static_cast<std::size_t>(E.cols()) / dim);
  const auto d = static_cast<Eigen::Index>(dim);
  NormalizedEmbeddings out{Eigen::MatrixXd(E.rows(), E.cols()), Eigen::MatrixXd(E.rows(), n_fields)};
  for (Eigen::Index b = 0; b < E.rows(); ++b) {
    for (Eigen::Index n = 0; n < n_fields; ++n) {
      const double s = E.block(b, n * d, 1, d).norm();
      out.norms(b, n) = s;
      out.unit.block(b, n * d, 1, d) = E.block(b, n * d, 1, d) / (s + kNormEps);
    }
  }
  return out;
}

/// dL/dE from dL/dE-hat. Exactly-zero blocks receive no gradient.
inline Eigen::MatrixXd normalize_embeddings_backward(const Eigen::MatrixXd& E, const Eigen::MatrixXd& norms,
                                                     const Eigen::MatrixXd& grad_unit, std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd grad(E.rows(), E.cols());
  for (Eigen::Index b = 0; b < E.rows(); ++b) {
    for (Eigen::Index n = 0; n < norms.cols(); ++n) {
      const double s = norms(b, n);
      auto g = grad_unit.block(b, n * d, 1, d);
      auto e = E.block(b, n * d, 1, d);
      if (s == 0.0) {
        grad.block(b, n * d, 1, d).setZero();
        continue;
      }
      const double denom = s + kNormEps;
      grad.block(b, n * d, 1, d) = g / denom - e * (e.cwiseProduct(g).sum() / (s * denom * denom));
    }
  }
  return grad;
}

/// E' block n = h_n * E-hat block n.
inline Eigen::MatrixXd weight_embeddings(const Eigen::MatrixXd& unit, std::span<const double> h, std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  if (static_cast<std::size_t>(unit.cols()) != h.size() * dim) fail(ErrorKind::usage, "weight_embeddings: score length mismatch");
  Eigen::MatrixXd out(unit.rows(), unit.cols());
  for (Eigen::Index n = 0; n < static_cast<Eigen::Index>(h.size()); ++n) {
    out.middleCols(n * d, d) = unit.middleCols(n * d, d) * h[static_cast<std::size_t>(n)];
  }
  return out;
}

}  // namespace fsel

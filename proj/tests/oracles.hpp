#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the code paths being checked.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace fsel::oracle {

/// Fraction of (positive, negative) pairs ordered correctly; ties count 1/2.
inline double pairwise_auc(std::span<const double> pred, std::span<const double> label) {
  double good = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (label[i] < 0.5) continue;
    for (std::size_t j = 0; j < pred.size(); ++j) {
      if (label[j] > 0.5) continue;
      pairs += 1.0;
      if (pred[i] > pred[j]) good += 1.0;
      else if (pred[i] == pred[j]) good += 0.5;
    }
  }
  return good / pairs;
}

/// Plain softmax of w * e^tau without max-subtraction, in long double.
inline std::vector<double> naive_softmax(const std::vector<double>& w, double tau) {
  long double sum = 0.0L;
  std::vector<long double> e(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    e[k] = std::exp(static_cast<long double>(w[k]) * std::exp(static_cast<long double>(tau)));
    sum += e[k];
  }
  std::vector<double> out(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) out[k] = static_cast<double>(e[k] / sum);
  return out;
}

/// h_n = sum_k fused_k sum_t [S[k][t] == F_n] * m[k][t], with m[k][t] = 0 iff t >= N - r.
inline std::vector<double> enumerate_scores(const std::vector<std::vector<std::string>>& s, const std::vector<std::string>& fields,
                                            std::size_t r, const std::vector<double>& fused) {
  const std::size_t n_pos = fields.size();
  std::vector<double> h(fields.size(), 0.0);
  for (std::size_t n = 0; n < fields.size(); ++n) {
    for (std::size_t k = 0; k < s.size(); ++k) {
      double inner = 0.0;
      for (std::size_t t = 0; t < n_pos; ++t) {
        const double m = t >= n_pos - r ? 0.0 : 1.0;
        if (s[k][t] == fields[n]) inner += m;
      }
      h[n] += fused[k] * inner;
    }
  }
  return h;
}

/// h*_n = sum_k fused_k sum_t [S[k][t] == F_n] * (1 - t / N).
inline std::vector<double> enumerate_final_scores(const std::vector<std::vector<std::string>>& s, const std::vector<std::string>& fields,
                                                  const std::vector<double>& fused) {
  const std::size_t n_pos = fields.size();
  std::vector<double> h(fields.size(), 0.0);
  for (std::size_t n = 0; n < fields.size(); ++n) {
    for (std::size_t k = 0; k < s.size(); ++k) {
      double inner = 0.0;
      for (std::size_t t = 0; t < n_pos; ++t) {
        if (s[k][t] == fields[n]) inner += 1.0 - static_cast<double>(t) / static_cast<double>(n_pos);
      }
      h[n] += fused[k] * inner;
    }
  }
  return h;
}

/// Plug-in mutual information (nats) between a categorical column and a binary label.
inline double mutual_information(std::span<const std::uint32_t> values, std::span<const std::uint8_t> labels) {
  std::map<std::uint32_t, std::array<double, 2>> joint;
  std::array<double, 2> py{0.0, 0.0};
  const double n = static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    joint[values[i]][labels[i]] += 1.0;
    py[labels[i]] += 1.0;
  }
  double mi = 0.0;
  for (const auto& [v, counts] : joint) {
    const double px = (counts[0] + counts[1]) / n;
    for (int y = 0; y < 2; ++y) {
      if (counts[y] == 0.0) continue;
      const double pxy = counts[y] / n;
      mi += pxy * std::log(pxy / (px * (py[y] / n)));
    }
  }
  return mi;
}

/// Central differences of `loss` w.r.t. every entry of `params`.
inline std::vector<double> central_differences(std::span<double> params, const std::function<double()>& loss, double step) {
  std::vector<double> out(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + step;
    const double up = loss();
    params[i] = saved - step;
    const double down = loss();
    params[i] = saved;
    out[i] = (up - down) / (2.0 * step);
  }
  return out;
}

/// ||a - b|| / max(||a|| + ||b||, floor).
inline double relative_error(std::span<const double> a, std::span<const double> b, double floor = 1e-10) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(na) + std::sqrt(nb), floor);
}

}  // namespace fsel::oracle

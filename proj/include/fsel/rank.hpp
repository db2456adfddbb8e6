#pragma once

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fsel/bridge.hpp"
#include "fsel/data.hpp"
#include "fsel/drs.hpp"
#include "fsel/selection.hpp"

namespace fsel {

/// Final per-field importance and the induced ordering. Ties keep schema order.
struct ImportanceRanking {
  std::vector<std::string> fields;  // schema order
  std::vector<double> h_star;       // aligned with `fields`
  std::vector<std::string> order;   // descending h_star

  double score(std::string_view field) const {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (fields[i] == field) return h_star[i];
    }
    fail(ErrorKind::usage, "unknown field '" + std::string(field) + "'");
  }

  std::size_t rank_of(std::string_view field) const {
    auto it = std::find(order.begin(), order.end(), field);
    if (it == order.end()) fail(ErrorKind::usage, "unknown field '" + std::string(field) + "'");
    return static_cast<std::size_t>(it - order.begin());
  }
};

/// fi = 1 - t / N for the ranking position t.
inline double decayed_importance(std::size_t t, std::size_t num_positions) {
  if (num_positions == 0 || t >= num_positions) {
    fail(ErrorKind::usage, "decayed_importance: position " + std::to_string(t) + " outside [0, " + std::to_string(num_positions) + ")");
  }
  return 1.0 - static_cast<double>(t) / static_cast<double>(num_positions);
}

/// Orders fields by descending score; equal scores keep their input order.
inline ImportanceRanking make_ranking(std::vector<std::string> fields, std::vector<double> scores) {
  std::vector<std::size_t> idx(fields.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  ImportanceRanking r;
  for (auto i : idx) r.order.push_back(fields[i]);
  r.fields = std::move(fields);
  r.h_star = std::move(scores);
  return r;
}

/// h*_n = sum_k fused_k * fi(position of n in ranking k), fused = softmax(w * exp(tau)).
inline ImportanceRanking final_scores(const SelectionMatrix& s, std::span<const std::string> fields, std::span<const double> w,
                                      double tau) {
  const auto pos = field_positions(s, fields);
  if (w.size() != s.num_experts()) fail(ErrorKind::data, "bridge vector has " + std::to_string(w.size()) + " entries for " +
                                                             std::to_string(s.num_experts()) + " experts");
  const auto fused = fuse_weights(w, tau);
  const std::size_t n = fields.size();
  std::vector<double> h(n, 0.0);
  for (std::size_t k = 0; k < pos.size(); ++k) {
    for (std::size_t f = 0; f < n; ++f) h[f] += fused[k] * decayed_importance(pos[k][f], n);
  }
  return make_ranking({fields.begin(), fields.end()}, std::move(h));
}

/// Equal-weight fusion: final_scores with a zero bridge vector.
inline ImportanceRanking fuse_uniform(const SelectionMatrix& s, std::span<const std::string> fields) {
  const std::vector<double> zeros(s.num_experts(), 0.0);
  return final_scores(s, fields, zeros, 0.0);
}

inline std::vector<std::string> select_top_d(const ImportanceRanking& ranking, std::size_t d) {
  if (d < 1 || d > ranking.order.size()) {
    fail(ErrorKind::input, "d=" + std::to_string(d) + " outside [1, " + std::to_string(ranking.order.size()) + "]");
  }
  return {ranking.order.begin(), ranking.order.begin() + static_cast<std::ptrdiff_t>(d)};
}

struct RetrainResult {
  std::vector<std::string> selected;  // schema order
  Metrics valid;
  Metrics test;
  std::size_t best_epoch = 0;
};

/// Fresh backbone over the selected fields only, trained without weighting or masking.
inline RetrainResult retrain_eval(const EncodedDataset& ds, std::span<const std::string> selected, const DrsConfig& model_config,
                                  const TrainConfig& config) {
  if (selected.empty()) fail(ErrorKind::input, "retrain needs at least one selected field");
  const auto subset = ds.select_fields(selected);
  const auto res = train(subset, model_config, config);
  return {subset.field_names, res.valid, res.test, res.best_epoch};
}

inline void to_json(nlohmann::json& j, const ImportanceRanking& r) {
  j = nlohmann::json::array();
  for (std::size_t i = 0; i < r.order.size(); ++i) {
    j.push_back({{"field", r.order[i]}, {"h_star", r.score(r.order[i])}, {"rank", i + 1}});
  }
}

inline void to_json(nlohmann::json& j, const Metrics& m) { j = nlohmann::json{{"auc", m.auc}, {"logloss", m.logloss}}; }

/// Plain-text table: rank, field, score, and a marker for selected rows.
inline void render_ranking(std::ostream& out, const ImportanceRanking& r, std::size_t d = 0) {
  std::size_t width = 5;
  for (const auto& f : r.order) width = std::max(width, f.size());
  char buf[64];
  out << "rank  " << std::string("field") << std::string(width - 5, ' ') << "  score     sel\n";
  for (std::size_t i = 0; i < r.order.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%4zu  ", i + 1);
    out << buf << r.order[i] << std::string(width - r.order[i].size(), ' ');
    std::snprintf(buf, sizeof(buf), "  %.6f  %s\n", r.score(r.order[i]), i < d ? "*" : "");
    out << buf;
  }
}

}  // namespace fsel

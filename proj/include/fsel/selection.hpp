#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "fsel/util.hpp"

namespace fsel {

/// K expert rankings over the same N fields; row k, column t holds the field
/// expert k placed at step t.
struct SelectionMatrix {
  std::vector<std::vector<std::string>> rows;

  std::size_t num_experts() const { return rows.size(); }
  std::size_t num_positions() const { return rows.empty() ? 0 : rows.front().size(); }

  friend bool operator==(const SelectionMatrix&, const SelectionMatrix&) = default;
};

inline void to_json(nlohmann::json& j, const SelectionMatrix& s) { j = s.rows; }
inline void from_json(const nlohmann::json& j, SelectionMatrix& s) { j.get_to(s.rows); }

/// Position of each field in each row: result[k][n] = t such that rows[k][t] == fields[n].
/// Throws a data error when a row is not a permutation of `fields`.
inline std::vector<std::vector<std::size_t>> field_positions(const SelectionMatrix& s, std::span<const std::string> fields) {
  if (s.rows.empty()) fail(ErrorKind::data, "selection matrix has no rows");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t n = 0; n < fields.size(); ++n) index.emplace(fields[n], n);

  std::vector<std::vector<std::size_t>> pos(s.rows.size());
  for (std::size_t k = 0; k < s.rows.size(); ++k) {
    const auto& row = s.rows[k];
    constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
    pos[k].assign(fields.size(), kUnset);
    for (std::size_t t = 0; t < row.size(); ++t) {
      auto it = index.find(row[t]);
      if (it == index.end()) fail(ErrorKind::data, "selection row " + std::to_string(k) + " references unknown field '" + row[t] + "'");
      if (pos[k][it->second] != kUnset) {
        fail(ErrorKind::data, "selection row " + std::to_string(k) + " lists field '" + row[t] + "' twice");
      }
      pos[k][it->second] = t;
    }
    for (std::size_t n = 0; n < fields.size(); ++n) {
      if (pos[k][n] == kUnset) fail(ErrorKind::data, "selection row " + std::to_string(k) + " is missing field '" + fields[n] + "'");
    }
  }
  return pos;
}

inline void validate_selection(const SelectionMatrix& s, std::span<const std::string> fields) {
  (void)field_positions(s, fields);
}

}  // namespace fsel

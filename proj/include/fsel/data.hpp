#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "fsel/util.hpp"

namespace fsel {

enum class Dtype { integer, string, floating };
enum class FieldRole { user, item, interaction };

/// Metadata for one categorical field. The description is shown to experts verbatim.
struct FeatureField {
  std::string name;
  std::string description;
  Dtype dtype = Dtype::string;
  std::string example_value;
  std::size_t cardinality = 1;
  FieldRole role = FieldRole::interaction;
};

struct DatasetSchema {
  std::string task_description;
  std::string dataset_description;
  std::vector<FeatureField> fields;
  std::string label_name;
  /// When set, a numeric label column is binarized as `value > threshold`.
  std::optional<double> label_threshold;
  std::vector<std::string> seed_features;

  std::size_t num_fields() const { return fields.size(); }

  std::optional<std::size_t> index_of(std::string_view name) const {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (fields[i].name == name) return i;
    }
    return std::nullopt;
  }

  std::vector<std::string> field_names() const {
    std::vector<std::string> out;
    out.reserve(fields.size());
    for (const auto& f : fields) out.push_back(f.name);
    return out;
  }

  bool is_seed(std::string_view name) const {
    return std::find(seed_features.begin(), seed_features.end(), name) != seed_features.end();
  }

  /// Throws a data error describing the first violated invariant.
  void validate() const {
    if (fields.empty()) fail(ErrorKind::data, "schema has no fields");
    std::unordered_set<std::string> seen;
    for (const auto& f : fields) {
      if (f.name.empty()) fail(ErrorKind::data, "schema field with empty name");
      if (!seen.insert(f.name).second) fail(ErrorKind::data, "duplicate schema field '" + f.name + "'");
      if (f.cardinality < 1) fail(ErrorKind::data, "field '" + f.name + "' has cardinality 0");
      if (trim(f.description).empty()) fail(ErrorKind::data, "field '" + f.name + "' has an empty description");
    }
    if (label_name.empty()) fail(ErrorKind::data, "schema has no label_name");
    if (seen.count(label_name)) fail(ErrorKind::data, "label '" + label_name + "' is also listed as a feature field");
    std::unordered_set<std::string> seeds;
    for (const auto& s : seed_features) {
      if (!seen.count(s)) fail(ErrorKind::data, "seed feature '" + s + "' is not a schema field");
      if (!seeds.insert(s).second) fail(ErrorKind::data, "seed feature '" + s + "' listed twice");
    }
    if (fields.size() < seed_features.size()) fail(ErrorKind::data, "fewer fields than seed features");
  }
};

// ---------------------------------------------------------------------------
// JSON mapping. Keys mirror the struct members; see README for the format.

NLOHMANN_JSON_SERIALIZE_ENUM(Dtype, {{Dtype::integer, "integer"}, {Dtype::string, "string"}, {Dtype::floating, "float"}})
NLOHMANN_JSON_SERIALIZE_ENUM(FieldRole,
                             {{FieldRole::user, "user"}, {FieldRole::item, "item"}, {FieldRole::interaction, "interaction"}})

inline void to_json(nlohmann::json& j, const FeatureField& f) {
  j = nlohmann::json{{"name", f.name},
                     {"description", f.description},
                     {"dtype", f.dtype},
                     {"example_value", f.example_value},
                     {"cardinality", f.cardinality},
                     {"role", f.role}};
}

inline void from_json(const nlohmann::json& j, FeatureField& f) {
  j.at("name").get_to(f.name);
  j.at("description").get_to(f.description);
  f.dtype = j.value("dtype", Dtype::string);
  if (j.contains("dtype") && !j.at("dtype").is_string()) fail(ErrorKind::data, "field '" + f.name + "': dtype must be a string");
  if (j.contains("dtype")) {
    const auto s = j.at("dtype").get<std::string>();
    if (s != "integer" && s != "string" && s != "float") fail(ErrorKind::data, "field '" + f.name + "': unknown dtype '" + s + "'");
  }
  f.example_value = j.value("example_value", std::string{});
  f.cardinality = j.value("cardinality", std::size_t{1});
  f.role = j.value("role", FieldRole::interaction);
}

inline void to_json(nlohmann::json& j, const DatasetSchema& s) {
  j = nlohmann::json{{"task_description", s.task_description},
                     {"dataset_description", s.dataset_description},
                     {"fields", s.fields},
                     {"label_name", s.label_name},
                     {"seed_features", s.seed_features}};
  if (s.label_threshold) j["label_threshold"] = *s.label_threshold;
}

inline void from_json(const nlohmann::json& j, DatasetSchema& s) {
  s.task_description = j.value("task_description", std::string{});
  s.dataset_description = j.value("dataset_description", std::string{});
  j.at("fields").get_to(s.fields);
  j.at("label_name").get_to(s.label_name);
  if (j.contains("label_threshold") && !j.at("label_threshold").is_null()) {
    s.label_threshold = j.at("label_threshold").get<double>();
  }
  if (j.contains("seed_features")) {
    j.at("seed_features").get_to(s.seed_features);
  } else {
    // Default: the first user-role field and the first item-role field.
    s.seed_features.clear();
    for (auto role : {FieldRole::user, FieldRole::item}) {
      for (const auto& f : s.fields) {
        if (f.role == role) {
          s.seed_features.push_back(f.name);
          break;
        }
      }
    }
  }
}

inline DatasetSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::input, "cannot open schema file '" + path + "'");
  DatasetSchema schema;
  try {
    schema = nlohmann::json::parse(in).get<DatasetSchema>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::data, "malformed schema '" + path + "': " + e.what());
  }
  schema.validate();
  return schema;
}

// ---------------------------------------------------------------------------

enum class Split : std::uint8_t { train = 0, valid = 1, test = 2 };

inline const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::valid: return "valid";
    case Split::test: return "test";
  }
  return "?";
}

/// Value table for one field. Index 0 is the out-of-vocabulary slot.
class Vocabulary {
 public:
  static constexpr std::uint32_t kOov = 0;
  static constexpr const char* kOovToken = "<OOV>";

  Vocabulary() : values_{kOovToken} {}

  std::uint32_t add(const std::string& value) {
    auto [it, inserted] = index_.try_emplace(value, static_cast<std::uint32_t>(values_.size()));
    if (inserted) values_.push_back(value);
    return it->second;
  }

  std::uint32_t encode(const std::string& value) const {
    auto it = index_.find(value);
    return it == index_.end() ? kOov : it->second;
  }

  const std::string& decode(std::uint32_t idx) const { return values_.at(idx); }
  std::size_t size() const { return values_.size(); }

 private:
  std::vector<std::string> values_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

/// Integer-encoded samples, stored row-major (num_samples x num_fields).
struct EncodedDataset {
  std::vector<std::string> field_names;
  std::vector<Vocabulary> vocabs;
  std::vector<std::uint32_t> indices;
  std::vector<std::uint8_t> labels;
  std::vector<Split> splits;

  std::size_t num_fields() const { return field_names.size(); }
  std::size_t num_samples() const { return labels.size(); }

  std::uint32_t at(std::size_t row, std::size_t field) const { return indices[row * num_fields() + field]; }

  std::span<const std::uint32_t> row(std::size_t r) const {
    return {indices.data() + r * num_fields(), num_fields()};
  }

  std::vector<std::size_t> vocab_sizes() const {
    std::vector<std::size_t> out;
    for (const auto& v : vocabs) out.push_back(v.size());
    return out;
  }

  std::vector<std::size_t> rows_in(Split s) const {
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < splits.size(); ++r) {
      if (splits[r] == s) out.push_back(r);
    }
    return out;
  }

  std::size_t count(Split s) const { return static_cast<std::size_t>(std::count(splits.begin(), splits.end(), s)); }

  std::optional<std::size_t> index_of(std::string_view name) const {
    for (std::size_t i = 0; i < field_names.size(); ++i) {
      if (field_names[i] == name) return i;
    }
    return std::nullopt;
  }

  /// Copy restricted to the named fields, kept in this dataset's field order.
  EncodedDataset select_fields(std::span<const std::string> names) const {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < field_names.size(); ++i) {
      if (std::find(names.begin(), names.end(), field_names[i]) != names.end()) keep.push_back(i);
    }
    for (const auto& n : names) {
      if (!index_of(n)) fail(ErrorKind::data, "unknown field '" + n + "'");
    }
    EncodedDataset out;
    for (auto i : keep) {
      out.field_names.push_back(field_names[i]);
      out.vocabs.push_back(vocabs[i]);
    }
    out.labels = labels;
    out.splits = splits;
    out.indices.reserve(num_samples() * keep.size());
    for (std::size_t r = 0; r < num_samples(); ++r) {
      for (auto i : keep) out.indices.push_back(at(r, i));
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// CSV

namespace detail {

/// Reads one RFC 4180 record; returns false at end of input. Quoted fields may span lines.
inline bool read_csv_record(std::istream& in, std::vector<std::string>& out, std::size_t& line_no) {
  out.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line_no;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      ++line_no;
      out.push_back(std::move(field));
      return true;
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  if (!any) return false;
  out.push_back(std::move(field));
  return true;
}

inline bool blank_record(const std::vector<std::string>& rec) {
  return rec.size() == 1 && trim(rec[0]).empty();
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(s), &used);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

inline std::string csv_escape(const std::string& v) {
  if (v.find_first_of(",\"\n\r") == std::string::npos) return v;
  std::string out = "\"";
  for (char c : v) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += '"';
  return out;
}

}  // namespace detail

/// Binary label from a raw cell, honoring the schema's threshold rule.
inline std::optional<std::uint8_t> parse_label(const DatasetSchema& schema, std::string_view cell) {
  const auto v = detail::parse_double(cell);
  if (!v) return std::nullopt;
  if (schema.label_threshold) return static_cast<std::uint8_t>(*v > *schema.label_threshold ? 1 : 0);
  if (*v == 0.0) return std::uint8_t{0};
  if (*v == 1.0) return std::uint8_t{1};
  return std::nullopt;
}

inline EncodedDataset load_csv(const DatasetSchema& schema, std::istream& in, const std::string& source = "<stream>") {
  std::vector<std::string> header;
  std::size_t line_no = 0;
  if (!detail::read_csv_record(in, header, line_no)) fail(ErrorKind::data, source + ": empty file (no header)");
  for (auto& h : header) h = std::string(trim(h));
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);

  const auto column_of = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail(ErrorKind::data, source + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  std::vector<std::size_t> cols;
  for (const auto& f : schema.fields) cols.push_back(column_of(f.name));
  const std::size_t label_col = column_of(schema.label_name);

  EncodedDataset ds;
  ds.field_names = schema.field_names();
  ds.vocabs.resize(cols.size());
  std::vector<std::string> rec;
  std::size_t record_line = line_no + 1;
  while (detail::read_csv_record(in, rec, line_no)) {
    const std::size_t this_line = record_line;
    record_line = line_no + 1;
    if (detail::blank_record(rec)) continue;
    if (rec.size() != header.size()) {
      fail(ErrorKind::data, source + ": line " + std::to_string(this_line) + ": expected " + std::to_string(header.size()) +
                                " columns, found " + std::to_string(rec.size()));
    }
    const auto label = parse_label(schema, rec[label_col]);
    if (!label) {
      fail(ErrorKind::data, source + ": line " + std::to_string(this_line) + ": unparseable label '" + rec[label_col] + "'");
    }
    for (std::size_t f = 0; f < cols.size(); ++f) ds.indices.push_back(ds.vocabs[f].add(rec[cols[f]]));
    ds.labels.push_back(*label);
  }
  if (ds.labels.empty()) fail(ErrorKind::data, source + ": no samples");
  ds.splits.assign(ds.labels.size(), Split::train);
  return ds;
}

inline EncodedDataset load_csv(const DatasetSchema& schema, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::input, "cannot open data file '" + path + "'");
  return load_csv(schema, in, path);
}

/// Writes decoded values plus the label column (as 0/1). Pair the file with a
/// schema that has no label_threshold, since labels are already binary.
inline void write_csv(const DatasetSchema& schema, const EncodedDataset& ds, std::ostream& out) {
  for (std::size_t f = 0; f < ds.num_fields(); ++f) out << detail::csv_escape(ds.field_names[f]) << ',';
  out << detail::csv_escape(schema.label_name) << '\n';
  for (std::size_t r = 0; r < ds.num_samples(); ++r) {
    for (std::size_t f = 0; f < ds.num_fields(); ++f) out << detail::csv_escape(ds.vocabs[f].decode(ds.at(r, f))) << ',';
    out << static_cast<int>(ds.labels[r]) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Splitting and batching

struct SplitRatios {
  double train = 0.7;
  double valid = 0.2;
  double test = 0.1;
};

/// Re-encodes every field with a vocabulary built from the training rows
/// only (first appearance in stored order); other values become OOV.
inline void rebuild_vocab_from_train(EncodedDataset& ds) {
  const std::size_t n_fields = ds.num_fields();
  for (std::size_t f = 0; f < n_fields; ++f) {
    Vocabulary fresh;
    std::vector<std::uint32_t> remap(ds.vocabs[f].size(), Vocabulary::kOov);
    std::vector<bool> mapped(ds.vocabs[f].size(), false);
    for (std::size_t r = 0; r < ds.num_samples(); ++r) {
      if (ds.splits[r] != Split::train) continue;
      const auto old = ds.at(r, f);
      if (old == Vocabulary::kOov || mapped[old]) continue;
      remap[old] = fresh.add(ds.vocabs[f].decode(old));
      mapped[old] = true;
    }
    for (std::size_t r = 0; r < ds.num_samples(); ++r) {
      auto& idx = ds.indices[r * n_fields + f];
      idx = remap[idx];
    }
    ds.vocabs[f] = std::move(fresh);
  }
}

/// Deterministic shuffled assignment; valid and test get floor(n * ratio), train the rest.
inline EncodedDataset split(EncodedDataset ds, SplitRatios ratios, std::uint64_t seed) {
  if (ratios.train < 0 || ratios.valid < 0 || ratios.test < 0) fail(ErrorKind::input, "split ratios must be non-negative");
  if (std::abs(ratios.train + ratios.valid + ratios.test - 1.0) > 1e-9) fail(ErrorKind::input, "split ratios must sum to 1");
  const std::size_t n = ds.num_samples();
  const auto n_valid = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.valid));
  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.test));
  const std::size_t n_train = n - n_valid - n_test;
  if (n_train == 0 || n_valid == 0 || n_test == 0) {
    fail(ErrorKind::data, "empty split (train=" + std::to_string(n_train) + ", valid=" + std::to_string(n_valid) +
                              ", test=" + std::to_string(n_test) + ")");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(derive_seed(seed, 0x5e1177));
  shuffle(order, rng);
  for (std::size_t i = 0; i < n; ++i) {
    ds.splits[order[i]] = i < n_train ? Split::train : (i < n_train + n_valid ? Split::valid : Split::test);
  }
  rebuild_vocab_from_train(ds);
  return ds;
}

struct Batch {
  std::size_t num_fields = 0;
  std::vector<std::uint32_t> indices;  // size() x num_fields
  std::vector<double> labels;

  std::size_t size() const { return labels.size(); }
  std::uint32_t at(std::size_t row, std::size_t field) const { return indices[row * num_fields + field]; }
};

inline Batch gather(const EncodedDataset& ds, std::span<const std::size_t> rows) {
  Batch b;
  b.num_fields = ds.num_fields();
  b.indices.reserve(rows.size() * b.num_fields);
  b.labels.reserve(rows.size());
  for (auto r : rows) {
    const auto src = ds.row(r);
    b.indices.insert(b.indices.end(), src.begin(), src.end());
    b.labels.push_back(ds.labels[r]);
  }
  return b;
}

/// Partitions one split into batches. With a shuffle seed the order depends
/// only on (seed, epoch); without one, stored order is kept.
inline std::vector<Batch> batches(const EncodedDataset& ds, Split which, std::size_t batch_size,
                                  std::optional<std::uint64_t> shuffle_seed = std::nullopt, std::uint64_t epoch = 0) {
  if (batch_size == 0) fail(ErrorKind::input, "batch_size must be >= 1");
  auto rows = ds.rows_in(which);
  if (shuffle_seed) {
    Rng rng(derive_seed(*shuffle_seed, 0xba7c4, epoch));
    shuffle(rows, rng);
  }
  std::vector<Batch> out;
  for (std::size_t start = 0; start < rows.size(); start += batch_size) {
    const std::size_t len = std::min(batch_size, rows.size() - start);
    out.push_back(gather(ds, std::span<const std::size_t>(rows).subspan(start, len)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// MovieLens-1M ("::"-separated ratings.dat, users.dat, movies.dat)

inline DatasetSchema movielens_1m_schema() {
  DatasetSchema s;
  s.task_description = "Predict whether a user will like a movie (rating greater than 3) from user profile and movie information.";
  s.dataset_description = "MovieLens-1M: 1,000,209 ratings given by 6,040 users to 3,706 movies, with 9 categorical feature fields.";
  s.fields = {
      {"user_id", "Anonymized identifier of the user.", Dtype::integer, "1", 6040, FieldRole::user},
      {"gender", "Gender of the user, F or M.", Dtype::string, "F", 2, FieldRole::user},
      {"age", "Age group of the user, coded by the lower bound of the range.", Dtype::integer, "25", 7, FieldRole::user},
      {"occupation", "Occupation of the user, coded as an integer between 0 and 20.", Dtype::integer, "12", 21, FieldRole::user},
      {"zip", "Zip code of the user's location.", Dtype::string, "48067", 3439, FieldRole::user},
      {"movie_id", "Identifier of the movie.", Dtype::integer, "1193", 3706, FieldRole::item},
      {"title", "Title of the movie including its release year.", Dtype::string, "Toy Story (1995)", 3706, FieldRole::item},
      {"genres", "Pipe-separated list of the movie's genres.", Dtype::string, "Animation|Children's|Comedy", 301, FieldRole::item},
      {"timestamp", "Time of the rating in seconds since the Unix epoch.", Dtype::integer, "978300760", 458455,
       FieldRole::interaction},
  };
  s.label_name = "rating";
  s.label_threshold = 3.0;
  s.seed_features = {"user_id", "movie_id"};
  return s;
}

namespace detail {

inline std::vector<std::string> split_double_colon(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find("::", start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 2;
  }
}

template <typename Row>
inline void read_dat(const std::string& path, std::size_t columns, Row&& on_row) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::input, "cannot open '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_double_colon(line);
    if (cells.size() != columns) fail(ErrorKind::data, path + ": line " + std::to_string(line_no) + ": expected " +
                                                           std::to_string(columns) + " fields");
    on_row(cells, line_no);
  }
}

}  // namespace detail

/// Joins the three MovieLens-1M files into one table in ratings.dat order.
inline EncodedDataset load_movielens_1m(const std::string& dir, const DatasetSchema& schema = movielens_1m_schema()) {
  std::map<std::string, std::vector<std::string>> users, movies;
  detail::read_dat(dir + "/users.dat", 5, [&](std::vector<std::string>& c, std::size_t) { users[c[0]] = c; });
  detail::read_dat(dir + "/movies.dat", 3, [&](std::vector<std::string>& c, std::size_t) { movies[c[0]] = c; });
  EncodedDataset ds;
  ds.field_names = schema.field_names();
  ds.vocabs.resize(ds.field_names.size());
  const std::string ratings = dir + "/ratings.dat";
  detail::read_dat(ratings, 4, [&](std::vector<std::string>& c, std::size_t line_no) {
    const auto u = users.find(c[0]);
    const auto m = movies.find(c[1]);
    if (u == users.end() || m == movies.end()) {
      fail(ErrorKind::data, ratings + ": line " + std::to_string(line_no) + ": unknown user or movie");
    }
    const std::map<std::string, std::string> row{{"user_id", c[0]},      {"gender", u->second[1]}, {"age", u->second[2]},
                                                 {"occupation", u->second[3]}, {"zip", u->second[4]}, {"movie_id", c[1]},
                                                 {"title", m->second[1]}, {"genres", m->second[2]}, {"timestamp", c[3]}};
    const auto label = parse_label(schema, c[2]);
    if (!label) fail(ErrorKind::data, ratings + ": line " + std::to_string(line_no) + ": unparseable rating '" + c[2] + "'");
    for (std::size_t f = 0; f < ds.field_names.size(); ++f) ds.indices.push_back(ds.vocabs[f].add(row.at(ds.field_names[f])));
    ds.labels.push_back(*label);
  });
  if (ds.labels.empty()) fail(ErrorKind::data, ratings + ": no samples");
  ds.splits.assign(ds.labels.size(), Split::train);
  return ds;
}

// ---------------------------------------------------------------------------
// Synthetic data with planted ground truth

struct SyntheticData {
  DatasetSchema schema;
  EncodedDataset dataset;
  /// Informative field names, strongest effect first.
  std::vector<std::string> ground_truth;
  std::vector<std::string> noise;
  /// Collinear field name -> informative field it relabels.
  std::vector<std::pair<std::string, std::string>> collinear;
};

/// Labels follow a logistic model over per-value effects of the informative
/// fields (and weaker seed-id effects). Noise fields are independent of the
/// label; every collinear field is a fixed relabeling of one informative field.
inline SyntheticData synthesize(std::size_t n_informative, std::size_t n_noise, std::size_t n_collinear,
                                std::size_t n_samples, std::uint64_t seed) {
  if (n_informative < 1) fail(ErrorKind::input, "synthesize: need at least one informative field");
  if (n_samples < 100) fail(ErrorKind::input, "synthesize: n_samples must be >= 100");

  struct Gen {
    FeatureField meta;
    std::size_t card;
    std::vector<double> effect;  // empty for noise
    std::optional<std::size_t> source;
    std::vector<std::size_t> relabel;
  };
  Rng rng(derive_seed(seed, 0x5717));
  std::vector<Gen> gens;

  const auto make_effects = [&](std::size_t card, double sd) {
    std::vector<double> e(card);
    for (auto& v : e) v = sd * standard_normal(rng);
    return e;
  };

  gens.push_back({{"user_id", "Anonymized identifier of the user; mildly predictive.", Dtype::integer, "17", 100, FieldRole::user},
                  100, make_effects(100, 0.3), std::nullopt, {}});
  gens.push_back({{"item_id", "Anonymized identifier of the item; mildly predictive.", Dtype::integer, "42", 100, FieldRole::item},
                  100, make_effects(100, 0.3), std::nullopt, {}});

  SyntheticData out;
  std::vector<std::size_t> informative_gen;
  for (std::size_t i = 0; i < n_informative; ++i) {
    const std::size_t card = 6 + (i * 5) % 11;
    const double sd = 1.2 * std::pow(0.85, static_cast<double>(i));
    const std::string name = "signal_" + std::to_string(i + 1);
    informative_gen.push_back(gens.size());
    gens.push_back({{name, "Informative attribute: its values shift the chance of a positive label (strength rank " +
                               std::to_string(i + 1) + ").",
                     Dtype::string, "v0", card, i % 2 == 0 ? FieldRole::user : FieldRole::item},
                    card, make_effects(card, sd), std::nullopt, {}});
    out.ground_truth.push_back(name);
  }
  for (std::size_t i = 0; i < n_noise; ++i) {
    const std::size_t card = 6 + (i * 7) % 11;
    const std::string name = "noise_" + std::to_string(i + 1);
    gens.push_back({{name, "Uninformative attribute: generated independently of the label.", Dtype::string, "v0", card,
                     FieldRole::interaction},
                    card, {}, std::nullopt, {}});
    out.noise.push_back(name);
  }
  for (std::size_t i = 0; i < n_collinear; ++i) {
    const std::size_t src = informative_gen[i % n_informative];
    const std::size_t card = gens[src].card;
    std::vector<std::size_t> relabel(card);
    for (std::size_t v = 0; v < card; ++v) relabel[v] = v;
    shuffle(relabel, rng);
    const std::string name = gens[src].meta.name + "_copy";
    gens.push_back({{name, "Redundant attribute: a recoding of " + gens[src].meta.name + ", carrying the same information.",
                     Dtype::string, "v0", card, FieldRole::item},
                    card, {}, src, std::move(relabel)});
    out.collinear.emplace_back(name, gens[src].meta.name);
  }

  // Seeds stay first; the remaining fields appear in a seeded order.
  std::vector<std::size_t> order(gens.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  shuffle(std::span<std::size_t>(order).subspan(2), rng);

  auto& schema = out.schema;
  schema.task_description = "Predict whether a user gives a positive response to an item (binary click-through prediction).";
  schema.dataset_description = "Synthetic interaction log with " + std::to_string(n_samples) + " samples and " +
                               std::to_string(gens.size()) + " categorical feature fields.";
  schema.label_name = "label";
  schema.seed_features = {"user_id", "item_id"};
  for (auto g : order) schema.fields.push_back(gens[g].meta);

  auto& ds = out.dataset;
  ds.field_names = schema.field_names();
  ds.vocabs.resize(gens.size());
  ds.indices.reserve(n_samples * gens.size());
  std::vector<std::size_t> raw(gens.size());
  for (std::size_t s = 0; s < n_samples; ++s) {
    double logit = 0.0;
    for (std::size_t g = 0; g < gens.size(); ++g) {
      if (gens[g].source) continue;
      raw[g] = static_cast<std::size_t>(uniform_index(rng, gens[g].card));
      if (!gens[g].effect.empty()) logit += gens[g].effect[raw[g]];
    }
    for (std::size_t g = 0; g < gens.size(); ++g) {
      if (gens[g].source) raw[g] = gens[g].relabel[raw[*gens[g].source]];
    }
    const double p = 1.0 / (1.0 + std::exp(-logit));
    ds.labels.push_back(uniform01(rng) < p ? 1 : 0);
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const auto g = order[pos];
      ds.indices.push_back(ds.vocabs[pos].add("v" + std::to_string(raw[g])));
    }
  }
  ds.splits.assign(n_samples, Split::train);
  return out;
}

}  // namespace fsel

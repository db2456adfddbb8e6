#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fsel/data.hpp"
#include "fsel/selection.hpp"
#include "fsel/util.hpp"

namespace fsel {

enum class ExpertKind { http, scripted, one_shot_http };

inline const char* expert_kind_name(ExpertKind k) {
  switch (k) {
    case ExpertKind::http: return "http";
    case ExpertKind::scripted: return "scripted";
    case ExpertKind::one_shot_http: return "one_shot_http";
  }
  return "?";
}

/// Anything that turns a prompt into a free-text answer.
class Expert {
 public:
  virtual ~Expert() = default;
  virtual const std::string& identity() const = 0;
  virtual ExpertKind kind() const = 0;
  virtual std::string complete(const std::string& prompt) = 0;
};

/// Raised when a response cannot be mapped onto a candidate feature.
class ParseFailure : public Error {
 public:
  ParseFailure(const std::string& raw_line, const std::string& why)
      : Error(ErrorKind::protocol, why + ": '" + raw_line + "'"), raw_line_(raw_line) {}
  const std::string& raw_line() const { return raw_line_; }

 private:
  std::string raw_line_;
};

// ---------------------------------------------------------------------------
// Prompt rendering

struct IterationState {
  std::vector<std::string> selected;    // seeds first, then picks in order
  std::vector<std::string> candidates;  // schema order
  std::size_t step = 0;

  static IterationState initial(const DatasetSchema& schema) {
    IterationState s;
    s.selected = schema.seed_features;
    for (const auto& f : schema.fields) {
      if (!schema.is_seed(f.name)) s.candidates.push_back(f.name);
    }
    return s;
  }

  void advance(const std::string& pick) {
    auto it = std::find(candidates.begin(), candidates.end(), pick);
    if (it == candidates.end()) fail(ErrorKind::usage, "'" + pick + "' is not a candidate");
    candidates.erase(it);
    selected.push_back(pick);
    ++step;
  }
};

namespace detail {

inline const char* dtype_label(Dtype d) {
  switch (d) {
    case Dtype::integer: return "integer";
    case Dtype::string: return "string";
    case Dtype::floating: return "float";
  }
  return "string";
}

inline constexpr const char* kCandidateHeader = "Candidate features:";
inline constexpr const char* kOneShotMarker = "Rank all candidate features";

inline void render_descriptions(std::ostringstream& out, const DatasetSchema& schema) {
  out << "[Descriptions]\n";
  out << "Task: " << schema.task_description << "\n";
  out << "Dataset: " << schema.dataset_description << "\n";
  out << "Features:\n";
  const std::pair<FieldRole, const char*> groups[] = {
      {FieldRole::user, "User features"}, {FieldRole::item, "Item features"}, {FieldRole::interaction, "Interaction features"}};
  for (const auto& [role, title] : groups) {
    bool header = false;
    for (const auto& f : schema.fields) {
      if (f.role != role) continue;
      if (trim(f.description).empty()) fail(ErrorKind::data, "field '" + f.name + "' has an empty description");
      if (!header) {
        out << title << ":\n";
        header = true;
      }
      out << "- " << f.name << ": " << f.description << " (data type: " << dtype_label(f.dtype)
          << "; example value: " << f.example_value << "; unique values: " << f.cardinality << ")\n";
    }
  }
  out << "\n";
}

inline void render_sets(std::ostringstream& out, const IterationState& state) {
  out << "[Feature sets]\n";
  out << "Features already selected:\n";
  for (const auto& s : state.selected) out << "- " << s << "\n";
  out << kCandidateHeader << "\n";
  for (const auto& c : state.candidates) out << "- " << c << "\n";
  out << "\n";
}

inline constexpr const char* kInstructions =
    "[Instructions]\n"
    "You are a professional researcher in recommender systems and feature selection. "
    "You will help choose the input features of a recommendation model for the task described below.\n\n";

inline constexpr const char* kCharacteristics =
    "The feature you choose should, as much as possible, have the following characteristics:\n"
    "1. They are informative.\n"
    "2. Independent of other selected features.\n"
    "3. Simple and easy for the model to understand.\n\n";

}  // namespace detail

/// Five blocks in order: instructions, descriptions, feature sets,
/// supplementary information and output formatting.
inline std::string render_prompt(const DatasetSchema& schema, const IterationState& state) {
  if (state.candidates.empty()) fail(ErrorKind::usage, "render_prompt: no candidate features left");
  std::ostringstream out;
  out << detail::kInstructions;
  detail::render_descriptions(out, schema);
  detail::render_sets(out, state);
  out << "[Supplementary information]\n"
         "Please select one feature from the candidate feature set that you think is most important for this task "
         "to add to the selected features. Suppose we will discrete the features based on their unique values.\n"
      << detail::kCharacteristics;
  out << "[Output formatting]\n"
         "Your answer's last line should be the feature name of your selected feature, without any other characters.\n";
  return out.str();
}

/// Single prompt asking for a complete importance order of the candidates.
inline std::string render_one_shot_prompt(const DatasetSchema& schema) {
  const auto state = IterationState::initial(schema);
  if (state.candidates.empty()) fail(ErrorKind::usage, "render_one_shot_prompt: no candidate features");
  std::ostringstream out;
  out << detail::kInstructions;
  detail::render_descriptions(out, schema);
  detail::render_sets(out, state);
  out << "[Supplementary information]\n"
      << detail::kOneShotMarker
      << " from the most important to the least important for this task, as additions to the selected features. "
         "Suppose we will discrete the features based on their unique values.\n"
         "Important features should, as much as possible, have the following characteristics:\n"
         "1. They are informative.\n"
         "2. Independent of other selected features.\n"
         "3. Simple and easy for the model to understand.\n\n";
  out << "[Output formatting]\n"
         "End your answer with every candidate feature name, one per line, most important first, "
         "without any other characters.\n";
  return out.str();
}

/// Candidate names listed in a prompt rendered by this module.
inline std::vector<std::string> prompt_candidates(const std::string& prompt) {
  std::vector<std::string> out;
  std::istringstream in(prompt);
  std::string line;
  bool inside = false;
  while (std::getline(in, line)) {
    if (!inside) {
      inside = line == detail::kCandidateHeader;
      continue;
    }
    if (line.rfind("- ", 0) != 0) break;
    out.push_back(line.substr(2));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Response parsing

/// Strips whitespace, list markers, surrounding quotes/backticks and trailing punctuation.
inline std::string normalize_answer(std::string_view line) {
  std::string_view s = trim(line);
  const auto is_quote = [](char c) { return c == '"' || c == '\'' || c == '`' || c == '*'; };
  const auto is_punct = [](char c) { return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?'; };
  bool changed = true;
  while (changed && !s.empty()) {
    changed = false;
    const auto before = s.size();
    s = trim(s);
    while (!s.empty() && is_punct(s.back())) s.remove_suffix(1);
    while (!s.empty() && is_quote(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_quote(s.back())) s.remove_suffix(1);
    changed = s.size() != before;
  }
  return std::string(s);
}

inline std::optional<std::string> match_candidate(std::string_view answer, const std::vector<std::string>& candidates) {
  const auto key = to_lower(answer);
  for (const auto& c : candidates) {
    if (to_lower(c) == key) return c;
  }
  return std::nullopt;
}

/// The last non-empty line, normalized and matched case-insensitively.
inline std::string parse_response(const std::string& text, const std::vector<std::string>& candidates) {
  std::istringstream in(text);
  std::string line;
  std::string last;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) last = line;
  }
  if (trim(last).empty()) throw ParseFailure(last, "empty response");
  const auto answer = normalize_answer(last);
  if (auto hit = match_candidate(answer, candidates)) return *hit;
  throw ParseFailure(std::string(trim(last)), "answer is not a candidate feature");
}

/// Full-order response: each line naming a candidate counts once, in order;
/// other lines are commentary. Selected/duplicate names or omissions are errors.
inline std::vector<std::string> parse_one_shot_response(const std::string& text, const std::vector<std::string>& candidates,
                                                        const std::vector<std::string>& selected) {
  std::vector<std::string> order;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::string_view body = trim(line);
    // Drop list markers such as "1." or "- ".
    std::size_t i = 0;
    while (i < body.size() && body[i] >= '0' && body[i] <= '9') ++i;
    if (i > 0 && i < body.size() && (body[i] == '.' || body[i] == ')')) body.remove_prefix(i + 1);
    else if (!body.empty() && (body.front() == '-' || body.front() == '*') && body.size() > 1 && body[1] == ' ') body.remove_prefix(2);
    const auto answer = normalize_answer(body);
    if (answer.empty()) continue;
    if (auto hit = match_candidate(answer, candidates)) {
      if (std::find(order.begin(), order.end(), *hit) != order.end()) throw ParseFailure(*hit, "feature listed twice");
      order.push_back(*hit);
    } else if (match_candidate(answer, selected)) {
      throw ParseFailure(answer, "extra feature (already selected) in ranking");
    }
  }
  for (const auto& c : candidates) {
    if (std::find(order.begin(), order.end(), c) == order.end()) throw ParseFailure(c, "ranking omits feature");
  }
  return order;
}

// ---------------------------------------------------------------------------
// Response cache (JSON lines)

struct CacheRecord {
  std::string expert;
  std::size_t step = 0;
  std::string prompt_hash;
  std::string raw_response;
  std::optional<std::string> parsed;
};

inline void to_json(nlohmann::json& j, const CacheRecord& r) {
  j = nlohmann::json{{"expert", r.expert}, {"step", r.step}, {"prompt_hash", r.prompt_hash}, {"raw_response", r.raw_response}};
  j["parsed"] = r.parsed ? nlohmann::json(*r.parsed) : nlohmann::json(nullptr);
}

inline void from_json(const nlohmann::json& j, CacheRecord& r) {
  j.at("expert").get_to(r.expert);
  j.at("step").get_to(r.step);
  j.at("prompt_hash").get_to(r.prompt_hash);
  j.at("raw_response").get_to(r.raw_response);
  if (j.contains("parsed") && !j.at("parsed").is_null()) r.parsed = j.at("parsed").get<std::string>();
}

/// Replays successfully parsed responses keyed by (expert, prompt hash).
/// New records are appended by a single writer under a mutex.
class ResponseCache {
 public:
  ResponseCache() = default;
  explicit ResponseCache(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      try {
        remember(nlohmann::json::parse(line).get<CacheRecord>());
      } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::input, "corrupt cache " + path_ + " line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  }

  std::optional<std::string> lookup(const std::string& expert, const std::string& prompt_hash) const {
    std::lock_guard lock(mutex_);
    auto it = hits_.find({expert, prompt_hash});
    if (it == hits_.end()) return std::nullopt;
    return it->second;
  }

  void append(std::span<const CacheRecord> records) {
    std::lock_guard lock(mutex_);
    std::ofstream out;
    if (!path_.empty()) {
      out.open(path_, std::ios::app | std::ios::binary);
      if (!out) fail(ErrorKind::input, "cannot append to cache " + path_);
    }
    for (const auto& r : records) {
      if (out) out << nlohmann::json(r).dump() << '\n';
      remember(r);
    }
  }

 private:
  void remember(const CacheRecord& r) {
    if (r.parsed) hits_[{r.expert, r.prompt_hash}] = r.raw_response;
  }

  std::string path_;
  mutable std::mutex mutex_;
  std::map<std::pair<std::string, std::string>, std::string> hits_;
};

// ---------------------------------------------------------------------------
// Experts that need no network

/// Deterministic stand-in: answers with its first preferred candidate, or
/// its full preference order when asked for a one-shot ranking.
class ScriptedExpert : public Expert {
 public:
  ScriptedExpert(std::string identity, std::vector<std::string> preference)
      : identity_(std::move(identity)), preference_(std::move(preference)) {}

  const std::string& identity() const override { return identity_; }
  ExpertKind kind() const override { return ExpertKind::scripted; }
  const std::vector<std::string>& preference() const { return preference_; }
  std::size_t calls() const { return calls_; }

  std::string complete(const std::string& prompt) override {
    ++calls_;
    const auto candidates = prompt_candidates(prompt);
    std::vector<std::string> ordered;
    for (const auto& p : preference_) {
      if (std::find(candidates.begin(), candidates.end(), p) != candidates.end()) ordered.push_back(p);
    }
    if (ordered.empty()) return "No preference among the remaining candidates.\n";
    if (prompt.find(detail::kOneShotMarker) != std::string::npos) {
      std::string out = "Ranking by scripted preference:\n";
      for (const auto& f : ordered) out += f + "\n";
      return out;
    }
    return "Following the scripted preference order.\n" + ordered.front() + "\n";
  }

 private:
  std::string identity_;
  std::vector<std::string> preference_;
  std::size_t calls_ = 0;
};

// ---------------------------------------------------------------------------
// Iteration drivers

inline constexpr std::size_t kParseRetries = 3;

namespace detail {

inline void check_scripted(const Expert& expert, const DatasetSchema& schema) {
  const auto* scripted = dynamic_cast<const ScriptedExpert*>(&expert);
  if (!scripted) return;
  std::multiset<std::string> want;
  for (const auto& f : schema.fields) {
    if (!schema.is_seed(f.name)) want.insert(f.name);
  }
  const std::multiset<std::string> have(scripted->preference().begin(), scripted->preference().end());
  if (want != have) {
    fail(ErrorKind::config, "scripted expert '" + expert.identity() + "': preference order must be a permutation of the non-seed fields");
  }
}

inline std::string describe(const std::string& s) { return s; }
inline std::string describe(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ",") + s;
  return out;
}

/// Prompt -> parsed answer. Cached answers are replayed; a failed parse is
/// retried live with the same prompt. Every live response is logged.
template <typename Parse>
auto ask(Expert& expert, const std::string& prompt, std::size_t step, const ResponseCache* cache, std::vector<CacheRecord>& log,
         Parse parse) {
  const bool cached_kind = expert.kind() != ExpertKind::scripted;
  const auto hash = hash_hex(prompt);
  if (cache && cached_kind) {
    if (auto raw = cache->lookup(expert.identity(), hash)) {
      try {
        return parse(*raw);
      } catch (const ParseFailure&) {
      }
    }
  }
  std::string last_error;
  for (std::size_t attempt = 0; attempt <= kParseRetries; ++attempt) {
    std::string raw;
    try {
      raw = expert.complete(prompt);
    } catch (const Error& e) {
      fail(e.kind(), "expert '" + expert.identity() + "' step " + std::to_string(step) + ": " + e.what());
    }
    try {
      auto result = parse(raw);
      if (cached_kind) log.push_back({expert.identity(), step, hash, raw, describe(result)});
      return result;
    } catch (const ParseFailure& e) {
      if (cached_kind) log.push_back({expert.identity(), step, hash, raw, std::nullopt});
      last_error = e.what();
    }
  }
  fail(ErrorKind::protocol, "expert '" + expert.identity() + "' step " + std::to_string(step) + ": no usable answer after " +
                                std::to_string(kParseRetries) + " retries (" + last_error + ")");
}

inline std::vector<std::string> iterate(Expert& expert, const DatasetSchema& schema, const ResponseCache* cache,
                                        std::vector<CacheRecord>& log) {
  auto state = IterationState::initial(schema);
  if (state.candidates.empty()) fail(ErrorKind::config, "schema has no non-seed fields to rank");
  check_scripted(expert, schema);
  while (!state.candidates.empty()) {
    const auto prompt = render_prompt(schema, state);
    const auto pick =
        ask(expert, prompt, state.step, cache, log, [&](const std::string& raw) { return parse_response(raw, state.candidates); });
    state.advance(pick);
  }
  return state.selected;
}

inline std::vector<std::string> one_shot(Expert& expert, const DatasetSchema& schema, const ResponseCache* cache,
                                         std::vector<CacheRecord>& log) {
  const auto state = IterationState::initial(schema);
  if (state.candidates.empty()) fail(ErrorKind::config, "schema has no non-seed fields to rank");
  check_scripted(expert, schema);
  const auto prompt = render_one_shot_prompt(schema);
  auto order = ask(expert, prompt, 0, cache, log, [&](const std::string& raw) {
    return parse_one_shot_response(raw, state.candidates, state.selected);
  });
  std::vector<std::string> ranking = state.selected;
  ranking.insert(ranking.end(), order.begin(), order.end());
  return ranking;
}

/// Appends buffered records even when the run throws, so paid-for responses survive.
struct FlushOnExit {
  ResponseCache* cache;
  std::vector<CacheRecord>& log;
  ~FlushOnExit() {
    if (cache && !log.empty()) {
      try {
        cache->append(log);
      } catch (...) {
      }
    }
  }
};

}  // namespace detail

/// One ranking row: seeds in schema-declared order, then one pick per call
/// until no candidates remain.
inline std::vector<std::string> run_iteration(Expert& expert, const DatasetSchema& schema, ResponseCache* cache = nullptr) {
  std::vector<CacheRecord> log;
  detail::FlushOnExit flush{cache, log};
  return detail::iterate(expert, schema, cache, log);
}

/// Whole ranking from a single prompt.
inline std::vector<std::string> run_one_shot(Expert& expert, const DatasetSchema& schema, ResponseCache* cache = nullptr) {
  std::vector<CacheRecord> log;
  detail::FlushOnExit flush{cache, log};
  return detail::one_shot(expert, schema, cache, log);
}

enum class RankingMode { iterative, one_shot };

/// One row per expert, in the given order; experts may run concurrently.
/// Cache records are appended in expert order after every run has finished.
/// Any failure fails the whole call.
inline SelectionMatrix collect(std::span<Expert* const> experts, const DatasetSchema& schema, ResponseCache* cache = nullptr,
                               bool parallel = false, RankingMode mode = RankingMode::iterative) {
  if (experts.empty()) fail(ErrorKind::config, "at least one expert is required");
  std::set<std::string> ids;
  for (const auto* e : experts) {
    if (!ids.insert(e->identity()).second) fail(ErrorKind::config, "duplicate expert identity '" + e->identity() + "'");
  }
  std::vector<std::vector<CacheRecord>> logs(experts.size());
  const auto run = [&](std::size_t k) {
    return mode == RankingMode::iterative ? detail::iterate(*experts[k], schema, cache, logs[k])
                                          : detail::one_shot(*experts[k], schema, cache, logs[k]);
  };
  std::vector<std::vector<std::string>> rows(experts.size());
  std::exception_ptr first;
  if (parallel && experts.size() > 1) {
    std::vector<std::future<std::vector<std::string>>> futures;
    for (std::size_t k = 0; k < experts.size(); ++k) futures.push_back(std::async(std::launch::async, run, k));
    for (std::size_t k = 0; k < futures.size(); ++k) {
      try {
        rows[k] = futures[k].get();
      } catch (...) {
        if (!first) first = std::current_exception();
      }
    }
  } else {
    for (std::size_t k = 0; k < experts.size() && !first; ++k) {
      try {
        rows[k] = run(k);
      } catch (...) {
        first = std::current_exception();
      }
    }
  }
  if (cache) {
    for (const auto& log : logs) cache->append(log);
  }
  if (first) std::rethrow_exception(first);
  return SelectionMatrix{std::move(rows)};
}

// ---------------------------------------------------------------------------
// Preference orders for scripted experts

/// Shuffles round(fraction * size) randomly chosen positions among themselves.
inline std::vector<std::string> perturb_order(std::vector<std::string> order, double fraction, std::uint64_t seed) {
  if (fraction < 0.0 || fraction > 1.0) fail(ErrorKind::input, "perturbation fraction must lie in [0, 1]");
  const auto m = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(order.size())));
  std::vector<std::size_t> positions(order.size());
  for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = i;
  Rng rng(derive_seed(seed, 0x9e27));
  shuffle(positions, rng);
  positions.resize(m);
  std::sort(positions.begin(), positions.end());
  std::vector<std::string> picked;
  for (auto p : positions) picked.push_back(order[p]);
  shuffle(picked, rng);
  for (std::size_t i = 0; i < m; ++i) order[positions[i]] = picked[i];
  return order;
}

inline std::vector<std::string> reversed_order(std::vector<std::string> order) {
  std::reverse(order.begin(), order.end());
  return order;
}

}  // namespace fsel

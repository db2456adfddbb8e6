#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fsel/baselines.hpp"
#include "fsel/bridge_training.hpp"
#include "fsel/data.hpp"
#include "fsel/drs.hpp"
#include "fsel/experts.hpp"
#include "fsel/http_expert.hpp"
#include "fsel/rank.hpp"
#include "fsel/selection.hpp"

namespace fsel::cli {

namespace fs = std::filesystem;

struct ExpertSpec {
  ExpertKind kind = ExpertKind::scripted;
  std::string identity;
  std::vector<std::string> order;  // scripted
  std::string order_file;          // scripted, alternative to `order`
  HttpExpertConfig http;
};

/// Everything a stage command needs. Defaults:
/// Adam lr 1e-3, batch 4096, embedding dim 8, beta 0.2, tau 4.0.
struct RunConfig {
  std::string schema_path;
  std::string data_path;
  std::string artifact_dir = "artifacts";
  std::vector<ExpertSpec> experts;
  std::optional<std::size_t> k;
  double beta = 0.2;
  double tau = 4.0;
  std::optional<std::size_t> d;
  bool sweep_d = false;
  double lr = 1e-3;
  std::size_t batch_size = 4096;
  std::size_t dim = 8;
  std::vector<std::size_t> hidden{128, 64};
  std::size_t epochs = 10;
  std::size_t patience = 2;
  std::uint64_t seed = 2024;
  SplitRatios split;
  std::size_t n_repeats = kDefaultPermutationRepeats;
  bool parallel_experts = true;
  std::vector<std::string> ground_truth;
  HttpExpertConfig http;  // shared defaults for http experts, including ones passed on the command line
  bool force = false;

  DrsConfig model_config() const { return {dim, hidden}; }
  TrainConfig train_config() const { return {epochs, batch_size, lr, patience, seed}; }
  BridgeConfig bridge_config() const { return {beta, tau, model_config(), train_config()}; }

  void validate() const {
    if (!(beta >= 0.0 && beta <= 1.0)) fail(ErrorKind::input, "beta must lie in [0, 1]");
    if (k && *k != experts.size()) {
      fail(ErrorKind::input, "K=" + std::to_string(*k) + " but " + std::to_string(experts.size()) + " experts are configured");
    }
    if (batch_size == 0 || dim == 0) fail(ErrorKind::input, "batch_size and dim must be positive");
  }
};

// ---------------------------------------------------------------------------
// Config parsing

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::input, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::input, "cannot write '" + path.string() + "'");
  out << content;
}

inline std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline nlohmann::json read_json(const std::string& path) {
  const auto text = read_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::input, "malformed JSON in '" + path + "': " + e.what());
  }
}

/// A JSON array of names, or one name per line ('#' starts a comment).
inline std::vector<std::string> read_order_file(const std::string& path) {
  const auto text = read_file(path);
  const auto first = trim(text);
  if (!first.empty() && first.front() == '[') {
    try {
      return nlohmann::json::parse(text).get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::input, "malformed order file '" + path + "': " + e.what());
    }
  }
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto name = trim(line);
    if (!name.empty()) out.emplace_back(name);
  }
  return out;
}

inline std::string resolve(const fs::path& base, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute()) return p;
  return (base / p).lexically_normal().string();
}

inline HttpExpertConfig http_defaults(const nlohmann::json& j, HttpExpertConfig c = {}) {
  c.endpoint = j.value("endpoint", c.endpoint);
  c.model = j.value("model", c.model);
  c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
  c.max_retries = j.value("max_retries", c.max_retries);
  c.api_key_env = j.value("api_key_env", c.api_key_env);
  c.retry_backoff_seconds = j.value("retry_backoff_seconds", c.retry_backoff_seconds);
  return c;
}

/// `scripted:<file>` or `http:<model>`.
inline ExpertSpec parse_expert_flag(const std::string& flag, const HttpExpertConfig& http_base) {
  const auto colon = flag.find(':');
  if (colon == std::string::npos) fail(ErrorKind::input, "expert '" + flag + "' must look like scripted:<file> or http:<name>");
  const auto kind = flag.substr(0, colon);
  const auto arg = flag.substr(colon + 1);
  ExpertSpec e;
  if (kind == "scripted") {
    e.kind = ExpertKind::scripted;
    e.order_file = arg;
    e.identity = fs::path(arg).stem().string();
  } else if (kind == "http" || kind == "one_shot_http") {
    e.kind = kind == "http" ? ExpertKind::http : ExpertKind::one_shot_http;
    e.identity = arg;
    e.http = http_base;
    e.http.model = arg;
  } else {
    fail(ErrorKind::input, "unknown expert kind '" + kind + "'");
  }
  return e;
}

inline RunConfig parse_config(const nlohmann::json& j, const fs::path& base) {
  RunConfig c;
  try {
    c.schema_path = resolve(base, j.value("schema", std::string{}));
    c.data_path = resolve(base, j.value("data", std::string{}));
    c.artifact_dir = resolve(base, j.value("artifact_dir", c.artifact_dir));
    if (j.contains("K") && !j.at("K").is_null()) c.k = j.at("K").get<std::size_t>();
    c.beta = j.value("beta", c.beta);
    c.tau = j.value("tau", c.tau);
    if (j.contains("d") && !j.at("d").is_null()) c.d = j.at("d").get<std::size_t>();
    c.sweep_d = j.value("sweep_d", c.sweep_d);
    c.lr = j.value("lr", c.lr);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.dim = j.value("dim", c.dim);
    c.hidden = j.value("hidden", c.hidden);
    c.epochs = j.value("epochs", c.epochs);
    c.patience = j.value("patience", c.patience);
    c.seed = j.value("seed", c.seed);
    if (j.contains("split")) {
      const auto r = j.at("split").get<std::vector<double>>();
      if (r.size() != 3) fail(ErrorKind::input, "split must have three ratios");
      c.split = {r[0], r[1], r[2]};
    }
    c.n_repeats = j.value("n_repeats", c.n_repeats);
    c.parallel_experts = j.value("parallel_experts", c.parallel_experts);
    c.ground_truth = j.value("ground_truth", c.ground_truth);
    c.http = http_defaults(j.value("http", nlohmann::json::object()));
    const auto& http_base = c.http;
    for (const auto& e : j.value("experts", nlohmann::json::array())) {
      if (e.is_string()) {
        auto spec = parse_expert_flag(e.get<std::string>(), http_base);
        spec.order_file = resolve(base, spec.order_file);
        c.experts.push_back(std::move(spec));
        continue;
      }
      ExpertSpec spec;
      const auto kind = e.at("kind").get<std::string>();
      spec.identity = e.at("identity").get<std::string>();
      if (kind == "scripted") {
        spec.kind = ExpertKind::scripted;
        spec.order = e.value("order", std::vector<std::string>{});
        spec.order_file = resolve(base, e.value("order_file", std::string{}));
      } else if (kind == "http" || kind == "one_shot_http") {
        spec.kind = kind == "http" ? ExpertKind::http : ExpertKind::one_shot_http;
        spec.http = http_defaults(e, http_base);
        if (spec.http.model.empty() || !e.contains("model")) spec.http.model = e.value("model", spec.identity);
      } else {
        fail(ErrorKind::input, "unknown expert kind '" + kind + "'");
      }
      c.experts.push_back(std::move(spec));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::input, std::string("invalid run config: ") + e.what());
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  return parse_config(read_json(path), fs::path(path).parent_path());
}

// ---------------------------------------------------------------------------
// Stage keys: hashes of the inputs that determine each artifact.

inline nlohmann::json experts_json(const RunConfig& c) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : c.experts) {
    nlohmann::json j{{"kind", expert_kind_name(e.kind)}, {"identity", e.identity}};
    if (e.kind == ExpertKind::scripted) {
      j["order"] = e.order.empty() && !e.order_file.empty() ? read_order_file(e.order_file) : e.order;
    } else {
      j["model"] = e.http.model;
      j["endpoint"] = e.http.endpoint;
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

inline std::string extract_key(const RunConfig& c, const DatasetSchema& schema) {
  return hash_hex(nlohmann::json{{"schema", schema}, {"experts", experts_json(c)}}.dump());
}

inline std::string data_key(const RunConfig& c) {
  return hash_hex(nlohmann::json{{"data", hash_hex(read_file(c.data_path))},
                                 {"split", {c.split.train, c.split.valid, c.split.test}},
                                 {"seed", c.seed}}
                      .dump());
}

inline std::string refine_key(const RunConfig& c, const std::string& extract, const std::string& data) {
  return hash_hex(nlohmann::json{{"extract", extract},
                                 {"data", data},
                                 {"beta", c.beta},
                                 {"tau", c.tau},
                                 {"lr", c.lr},
                                 {"batch_size", c.batch_size},
                                 {"dim", c.dim},
                                 {"hidden", c.hidden},
                                 {"epochs", c.epochs},
                                 {"patience", c.patience},
                                 {"seed", c.seed}}
                      .dump());
}

// ---------------------------------------------------------------------------
// Commands

/// Injection points for tests: the HTTP transport and the output streams.
struct Context {
  HttpTransport transport = httplib_transport;
  std::ostream* out = &std::cout;
  std::ostream* err = &std::cerr;
};

inline std::vector<std::unique_ptr<Expert>> build_experts(const RunConfig& c, const Context& ctx) {
  std::vector<std::unique_ptr<Expert>> out;
  for (const auto& e : c.experts) {
    if (e.kind == ExpertKind::scripted) {
      auto order = e.order.empty() && !e.order_file.empty() ? read_order_file(e.order_file) : e.order;
      out.push_back(std::make_unique<ScriptedExpert>(e.identity, std::move(order)));
    } else {
      out.push_back(std::make_unique<HttpExpert>(e.identity, e.http, ctx.transport, e.kind));
    }
  }
  return out;
}

inline std::vector<Expert*> raw_pointers(const std::vector<std::unique_ptr<Expert>>& experts) {
  std::vector<Expert*> out;
  for (const auto& e : experts) out.push_back(e.get());
  return out;
}

struct Paths {
  fs::path dir;
  fs::path selection() const { return dir / "selection.json"; }
  fs::path cache() const { return dir / "cache.jsonl"; }
  fs::path bridge() const { return dir / "bridge.json"; }
  fs::path refine_metrics() const { return dir / "refine_metrics.jsonl"; }
  fs::path ranking() const { return dir / "ranking.json"; }
  fs::path report() const { return dir / "report.json"; }
  fs::path metrics() const { return dir / "metrics.jsonl"; }
  fs::path train_report() const { return dir / "train_report.json"; }
  fs::path baseline(Method m) const { return dir / (std::string("baseline_") + method_name(m) + ".json"); }
};

inline void check_key(const nlohmann::json& artifact, const char* key, const std::string& expected, const fs::path& where, bool force,
                      const Context& ctx) {
  const auto found = artifact.value(key, std::string{});
  if (found == expected) return;
  if (force) {
    *ctx.err << "warning: " << where.string() << " was produced from different inputs (" << key << " mismatch); continuing (--force)\n";
    return;
  }
  fail(ErrorKind::input, where.string() + " was produced from different inputs (" + key + " " + found + " != " + expected +
                             "); rerun the upstream stage or pass --force");
}

inline EncodedDataset load_dataset(const RunConfig& c, const DatasetSchema& schema) {
  if (c.data_path.empty()) fail(ErrorKind::input, "no data path configured");
  return split(load_csv(schema, c.data_path), c.split, c.seed);
}

inline DatasetSchema load_run_schema(const RunConfig& c) {
  if (c.schema_path.empty()) fail(ErrorKind::input, "no schema path configured");
  return load_schema(c.schema_path);
}

/// Stage 1: expert rankings -> selection.json (+ response cache).
inline SelectionMatrix cmd_extract(const RunConfig& c, const Context& ctx = {}) {
  c.validate();
  const auto schema = load_run_schema(c);
  const Paths paths{c.artifact_dir};
  fs::create_directories(paths.dir);
  ResponseCache cache(paths.cache().string());
  auto experts = build_experts(c, ctx);
  const auto ptrs = raw_pointers(experts);
  const auto s = collect(ptrs, schema, &cache, c.parallel_experts);
  nlohmann::json ids = nlohmann::json::array();
  for (const auto& e : c.experts) ids.push_back(e.identity);
  write_file(paths.selection(), dump({{"extract_key", extract_key(c, schema)}, {"experts", ids}, {"matrix", s}}));
  *ctx.out << "wrote " << paths.selection().string() << " (" << s.num_experts() << " x " << s.num_positions() << ")\n";
  return s;
}

struct LoadedSelection {
  SelectionMatrix matrix;
  std::vector<std::string> experts;
  std::string extract_key;
};

inline LoadedSelection load_selection(const RunConfig& c, const DatasetSchema& schema, const Context& ctx) {
  const Paths paths{c.artifact_dir};
  if (!fs::exists(paths.selection())) fail(ErrorKind::input, "missing " + paths.selection().string() + " (run extract first)");
  const auto j = read_json(paths.selection().string());
  LoadedSelection out;
  try {
    out.matrix = j.at("matrix").get<SelectionMatrix>();
    out.experts = j.value("experts", std::vector<std::string>{});
    out.extract_key = j.value("extract_key", std::string{});
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::data, "malformed " + paths.selection().string() + ": " + e.what());
  }
  check_key(j, "extract_key", extract_key(c, schema), paths.selection(), c.force, ctx);
  validate_selection(out.matrix, schema.field_names());
  return out;
}

/// Stage 2: joint surrogate + bridge training -> bridge.json.
inline BridgeResult cmd_refine(const RunConfig& c, const Context& ctx = {}) {
  c.validate();
  const auto schema = load_run_schema(c);
  const auto sel = load_selection(c, schema, ctx);
  const auto ds = load_dataset(c, schema);
  const Paths paths{c.artifact_dir};
  std::string epoch_log;
  const auto result = train_bridge(ds, sel.matrix, c.bridge_config(), [&](const EpochRecord& r) {
    nlohmann::json line{{"stage", "refine"}, {"epoch", r.epoch}, {"train_loss", r.train_loss}, {"valid", r.valid}, {"w", r.w}};
    epoch_log += line.dump() + "\n";
    *ctx.err << line.dump() << "\n";
  });
  write_file(paths.refine_metrics(), epoch_log);
  const nlohmann::json artifact{{"refine_key", refine_key(c, sel.extract_key, data_key(c))},
                                {"experts", sel.experts},
                                {"w", result.w},
                                {"w_hat", result.fused},
                                {"tau", c.tau},
                                {"beta", c.beta},
                                {"best_epoch", result.training.best_epoch},
                                {"valid", result.training.valid},
                                {"test", result.training.test}};
  write_file(paths.bridge(), dump(artifact));
  *ctx.out << "wrote " << paths.bridge().string() << "\n";
  return result;
}

inline std::vector<std::size_t> d_values(const RunConfig& c, std::size_t n_fields) {
  if (c.sweep_d) {
    std::vector<std::size_t> all;
    for (std::size_t d = 1; d <= n_fields; ++d) all.push_back(d);
    return all;
  }
  if (!c.d) fail(ErrorKind::input, "no selection size: pass --d or --sweep-d");
  if (*c.d < 1 || *c.d > n_fields) fail(ErrorKind::input, "d=" + std::to_string(*c.d) + " outside [1, " + std::to_string(n_fields) + "]");
  return {*c.d};
}

inline std::size_t best_row(const std::vector<SelectionRow>& rows) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].valid.auc > rows[best].valid.auc) best = i;
  }
  return best;
}

inline std::size_t recovered(const std::vector<std::string>& selected, const std::vector<std::string>& truth) {
  std::size_t n = 0;
  for (const auto& t : truth) n += std::find(selected.begin(), selected.end(), t) != selected.end() ? 1 : 0;
  return n;
}

/// Stage 3: final scores -> top-d -> retrain from scratch -> report.json.
inline nlohmann::json cmd_retrain(const RunConfig& c, const Context& ctx = {}) {
  c.validate();
  const auto schema = load_run_schema(c);
  const auto sel = load_selection(c, schema, ctx);
  const Paths paths{c.artifact_dir};
  if (!fs::exists(paths.bridge())) fail(ErrorKind::input, "missing " + paths.bridge().string() + " (run refine first)");
  const auto bridge = read_json(paths.bridge().string());
  check_key(bridge, "refine_key", refine_key(c, sel.extract_key, data_key(c)), paths.bridge(), c.force, ctx);
  std::vector<double> w;
  try {
    w = bridge.at("w").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::data, "malformed " + paths.bridge().string() + ": " + e.what());
  }
  const auto fields = schema.field_names();
  const auto ranking = final_scores(sel.matrix, fields, w, c.tau);
  const auto ds = load_dataset(c, schema);

  std::vector<SelectionRow> rows;
  std::string metric_lines;
  for (auto d : d_values(c, fields.size())) {
    const auto selected = select_top_d(ranking, d);
    const auto res = retrain_eval(ds, selected, c.model_config(), c.train_config());
    rows.push_back({d, res.selected, res.valid, res.test});
    metric_lines += nlohmann::json{{"stage", "retrain"}, {"d", d}, {"valid", res.valid}, {"test", res.test}}.dump() + "\n";
  }
  const auto best = best_row(rows);
  nlohmann::json report{{"refine_key", bridge.value("refine_key", std::string{})},
                        {"method", "self"},
                        {"d_mode", c.sweep_d ? "sweep" : "fixed"},
                        {"best_d", rows[best].d},
                        {"w_hat", fuse_weights(w, c.tau)},
                        {"ranking", ranking},
                        {"rows", rows}};
  if (!c.ground_truth.empty()) {
    report["ground_truth_recovered"] = recovered(rows[best].selected, c.ground_truth);
    report["ground_truth_size"] = c.ground_truth.size();
  }
  write_file(paths.ranking(), dump(ranking));
  write_file(paths.metrics(), metric_lines);
  write_file(paths.report(), dump(report));

  render_ranking(*ctx.out, ranking, rows[best].d);
  BaselineReport table;
  table.method = Method::self;
  table.rows = rows;
  render_comparison(*ctx.out, std::span<const BaselineReport>(&table, 1));
  return report;
}

/// Permutation importance or one of the ablations, end to end.
inline BaselineReport cmd_baseline(const RunConfig& c, Method method, const Context& ctx = {}) {
  c.validate();
  const auto schema = load_run_schema(c);
  const auto ds = load_dataset(c, schema);
  PipelineConfig pc;
  pc.bridge = c.bridge_config();
  pc.n_repeats = c.n_repeats;
  pc.d_values = d_values(c, schema.num_fields());

  AblationInputs in;
  in.dataset = &ds;
  in.schema = &schema;
  const Paths paths{c.artifact_dir};
  std::optional<ResponseCache> cache;
  std::vector<std::unique_ptr<Expert>> experts;
  if (method != Method::permutation) {
    fs::create_directories(paths.dir);
    cache.emplace(paths.cache().string());
    in.cache = &*cache;
  }
  if (method == Method::self || method == Method::self_wo_bv || method == Method::self_wo_mm) {
    in.selection = load_selection(c, schema, ctx).matrix;
  }
  if (method == Method::self_wo_ip) {
    experts = build_experts(c, ctx);
    in.experts = raw_pointers(experts);
  }
  const auto report = run_ablation(method, in, pc);
  nlohmann::json j = report;
  j["n_repeats"] = c.n_repeats;
  write_file(paths.baseline(method), dump(j));
  render_comparison(*ctx.out, std::span<const BaselineReport>(&report, 1));
  return report;
}

/// Plain backbone on every field.
inline TrainResult cmd_train(const RunConfig& c, const Context& ctx = {}) {
  const auto schema = load_run_schema(c);
  const auto ds = load_dataset(c, schema);
  const auto res = train(ds, c.model_config(), c.train_config(), [&](const EpochRecord& r) {
    *ctx.err << nlohmann::json{{"stage", "train"}, {"epoch", r.epoch}, {"train_loss", r.train_loss}, {"valid", r.valid}}.dump() << "\n";
  });
  const Paths paths{c.artifact_dir};
  write_file(paths.train_report(), dump({{"best_epoch", res.best_epoch}, {"valid", res.valid}, {"test", res.test}}));
  *ctx.out << "valid auc " << res.valid.auc << " logloss " << res.valid.logloss << "\n"
           << "test  auc " << res.test.auc << " logloss " << res.test.logloss << "\n";
  return res;
}

/// MovieLens-1M .dat files -> data.csv + schema.json (labels already binarized).
inline void cmd_import_movielens(const fs::path& ml_dir, const fs::path& out_dir, const Context& ctx = {}) {
  auto schema = movielens_1m_schema();
  const auto ds = load_movielens_1m(ml_dir.string(), schema);
  std::ostringstream csv;
  write_csv(schema, ds, csv);
  schema.label_threshold.reset();
  write_file(out_dir / "data.csv", csv.str());
  write_file(out_dir / "schema.json", dump(schema));
  *ctx.out << "wrote " << ds.num_samples() << " samples to " << out_dir.string() << "\n";
}

struct SynthOptions {
  std::size_t informative = 8;
  std::size_t noise = 8;
  std::size_t collinear = 0;
  std::size_t samples = 50000;
  std::uint64_t seed = 7;
  double perturb = 0.3;
};

/// Synthetic demo project: data, schema, three scripted experts and a config.
inline void cmd_synth(const fs::path& out_dir, const SynthOptions& o, const Context& ctx = {}) {
  const auto syn = synthesize(o.informative, o.noise, o.collinear, o.samples, o.seed);
  std::vector<std::string> collinear_names;
  for (const auto& [name, src] : syn.collinear) collinear_names.push_back(name);
  std::vector<std::string> core = syn.ground_truth;
  core.insert(core.end(), syn.noise.begin(), syn.noise.end());
  auto aligned = core;
  aligned.insert(aligned.end(), collinear_names.begin(), collinear_names.end());
  auto perturbed = perturb_order(core, o.perturb, o.seed);
  perturbed.insert(perturbed.end(), collinear_names.begin(), collinear_names.end());

  std::ostringstream csv;
  write_csv(syn.schema, syn.dataset, csv);
  write_file(out_dir / "data.csv", csv.str());
  write_file(out_dir / "schema.json", dump(syn.schema));
  write_file(out_dir / "experts" / "aligned.json", dump(aligned));
  write_file(out_dir / "experts" / "perturbed.json", dump(perturbed));
  write_file(out_dir / "experts" / "reversed.json", dump(reversed_order(aligned)));
  const nlohmann::json config{{"schema", "schema.json"},
                              {"data", "data.csv"},
                              {"artifact_dir", "artifacts"},
                              {"experts", {"scripted:experts/aligned.json", "scripted:experts/perturbed.json", "scripted:experts/reversed.json"}},
                              {"batch_size", 1024},
                              {"epochs", 6},
                              {"d", syn.ground_truth.size() + syn.schema.seed_features.size()},
                              {"ground_truth", syn.ground_truth}};
  write_file(out_dir / "config.json", dump(config));
  *ctx.out << "wrote synthetic project to " << out_dir.string() << "\n";
}

}  // namespace fsel::cli

// fsel: staged feature selection for CTR models.
//
//   fsel extract  --config run.json        expert rankings -> selection.json
//   fsel refine   --config run.json        bridge training  -> bridge.json
//   fsel retrain  --config run.json --d 10 top-d retrain    -> report.json
//   fsel baseline permutation --config run.json --d 10
//   fsel train    --config run.json        plain backbone on all fields
//   fsel synth    --out demo/              synthetic project with scripted experts
//   fsel import-ml1m --ml-dir ml-1m/ --out ml/

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fsel/cli.hpp"

int main(int argc, char** argv) {
  using namespace fsel;
  CLI::App app{"LLM-guided feature selection for deep recommender models"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> d;
  bool sweep_d = false;
  std::optional<double> beta;
  std::optional<double> tau;
  std::vector<std::string> expert_flags;
  std::optional<std::string> artifact_dir;
  bool force = false;

  const auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Run configuration (JSON)")->required();
    cmd->add_option("--seed", seed, "Random seed");
    cmd->add_option("--d", d, "Number of fields to keep");
    cmd->add_flag("--sweep-d", sweep_d, "Retrain for every d and report the best validation AUC");
    cmd->add_option("--beta", beta, "Maximum masking ratio");
    cmd->add_option("--tau", tau, "Softmax temperature exponent");
    cmd->add_option("--experts", expert_flags, "scripted:<file> or http:<model>; repeatable, replaces the config list");
    cmd->add_option("--artifact-dir", artifact_dir, "Override the artifact directory");
    cmd->add_flag("--force", force, "Accept upstream artifacts built from different inputs");
  };

  auto* extract = app.add_subcommand("extract", "Query experts and write the selection matrix");
  auto* refine = app.add_subcommand("refine", "Train the surrogate with the bridge vector");
  auto* retrain = app.add_subcommand("retrain", "Rank, select top-d and retrain from scratch");
  auto* baseline = app.add_subcommand("baseline", "Run the permutation baseline or an ablation");
  auto* train = app.add_subcommand("train", "Train the backbone on all fields");
  std::string method;
  baseline->add_option("method", method, "permutation | self | self_wo_mm | self_wo_ip | self_wo_bv")->required();
  for (auto* cmd : {extract, refine, retrain, baseline, train}) add_run_flags(cmd);

  auto* synth = app.add_subcommand("synth", "Write a synthetic dataset, schema, scripted experts and config");
  std::string out_dir;
  cli::SynthOptions so;
  synth->add_option("--out", out_dir, "Output directory")->required();
  synth->add_option("--informative", so.informative);
  synth->add_option("--noise", so.noise);
  synth->add_option("--collinear", so.collinear);
  synth->add_option("--samples", so.samples);
  synth->add_option("--seed", so.seed);
  synth->add_option("--perturb", so.perturb, "Fraction of positions shuffled for the perturbed expert");

  auto* import_ml = app.add_subcommand("import-ml1m", "Convert MovieLens-1M .dat files into data.csv and schema.json");
  std::string ml_dir;
  import_ml->add_option("--ml-dir", ml_dir, "Directory holding ratings.dat, users.dat and movies.dat")->required();
  import_ml->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) {
      cli::cmd_synth(out_dir, so);
      return 0;
    }
    if (import_ml->parsed()) {
      cli::cmd_import_movielens(ml_dir, out_dir);
      return 0;
    }
    auto cfg = cli::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (d) cfg.d = *d;
    if (sweep_d) cfg.sweep_d = true;
    if (beta) cfg.beta = *beta;
    if (tau) cfg.tau = *tau;
    if (artifact_dir) cfg.artifact_dir = *artifact_dir;
    if (force) cfg.force = true;
    if (!expert_flags.empty()) {
      cfg.experts.clear();
      for (const auto& f : expert_flags) cfg.experts.push_back(cli::parse_expert_flag(f, cfg.http));
    }

    if (extract->parsed()) cli::cmd_extract(cfg);
    else if (refine->parsed()) cli::cmd_refine(cfg);
    else if (retrain->parsed()) cli::cmd_retrain(cfg);
    else if (baseline->parsed()) cli::cmd_baseline(cfg, parse_method(method));
    else if (train->parsed()) cli::cmd_train(cfg);
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

// netadv: staged adversarial-robustness experiments on IDS and traffic data.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "netadv/error.hpp"
#include "netadv/stages.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2 };

bool is_json(const fs::path& p) { return p.extension() == ".json"; }

json read_json_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw netadv::MissingArtifactError(p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw netadv::ValidationError(p.filename().string(), std::string("not valid JSON: ") + e.what());
  }
}

// Accepts the attack_spec.json sidecar or a bare spec object; classes stay named.
netadv::AttackSettings attack_from_json(json j) {
  if (j.contains("spec")) j = json(j).at("spec");
  netadv::AttackSettings out;
  auto take_name = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    if (!j.at(key).is_string()) throw netadv::ValidationError(std::string("attack.") + key, "expected a class name");
    auto name = j.at(key).get<std::string>();
    j[key] = nullptr;
    return name;
  };
  out.target = take_name("target");
  out.source = take_name("source");
  out.spec = netadv::attack_spec_from_json(j, {});
  return out;
}

netadv::DefenseSpec defense_from_json(json j) {
  if (j.contains("spec")) j = json(j).at("spec");
  return netadv::defense_spec_from_json(j);
}

struct Common {
  std::string dir;
  std::string config;
  std::size_t workers = 1;
};

std::optional<netadv::ExperimentConfig> maybe_config(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return netadv::load_config(path);
}

fs::path pick_dir(const Common& c, const std::optional<netadv::ExperimentConfig>& cfg) {
  if (!c.dir.empty()) return c.dir;
  if (cfg) return netadv::resolve_output_dir(*cfg);
  return netadv::output_root();
}

int run(int argc, char** argv) {
  CLI::App app{"Adversarial robustness experiments for network classifiers"};
  app.require_subcommand(1);
  app.footer(std::string("Default output root: $") + netadv::kOutputRootEnv + " (else ./netadv-out).");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Parse, split, encode and normalize a dataset");
  std::string format, in_path, out_dir, test_path, ingest_config;
  double fraction = 0.8;
  std::uint64_t ingest_seed = 0;
  std::size_t max_train = 0, max_test = 0;
  ingest->add_option("--format", format, "Input format")->check(CLI::IsMember({"nslkdd", "moore-arff"}));
  ingest->add_option("--in", in_path, "Dataset file or directory");
  ingest->add_option("--out", out_dir, "Output directory");
  ingest->add_option("--test", test_path, "Separate test file");
  ingest->add_option("--train-fraction", fraction, "Training share of the split")->capture_default_str();
  ingest->add_option("--seed", ingest_seed, "Split and subsampling seed")->capture_default_str();
  ingest->add_option("--max-train-samples", max_train, "Stratified training cap (0 = none)");
  ingest->add_option("--max-test-samples", max_test, "Stratified test cap (0 = none)");
  ingest->add_option("--config", ingest_config, "Take [data] settings and the seed from an experiment config");

  // train
  auto* train = app.add_subcommand("train", "Train the victim model on the ingested data");
  Common train_c;
  std::string model_kind, transfer_kind;
  train->add_option("--model", model_kind, "Model family")->check(CLI::IsMember({"svm", "mlp"}));
  train->add_option("--config", train_c.config, "Experiment config")->required();
  train->add_option("--dir", train_c.dir, "Experiment directory");
  train->add_option("--transfer", transfer_kind, "Also train a transfer model")
      ->check(CLI::IsMember({"svm", "mlp", "none"}));

  // attack
  auto* attack = app.add_subcommand("attack", "Craft adversarial examples for the test set");
  Common attack_c;
  std::string attack_spec, checkpoint;
  std::optional<std::uint64_t> attack_seed;
  attack->add_option("--spec", attack_spec, "Experiment config or attack spec JSON")->required();
  attack->add_option("--model", checkpoint, "Model checkpoint")->required();
  attack->add_option("--dir", attack_c.dir, "Experiment directory (default: the checkpoint's directory)");
  attack->add_option("--seed", attack_seed, "Sample-selection seed (default: config seed or 0)");
  attack->add_option("--workers", attack_c.workers, "Worker threads")->check(CLI::PositiveNumber);

  // defend
  auto* defend = app.add_subcommand("defend", "Build the defended model");
  Common defend_c;
  std::string defense_spec;
  std::optional<std::uint64_t> defend_seed;
  defend->add_option("--spec", defense_spec, "Experiment config or defense spec JSON")->required();
  defend->add_option("--dir", defend_c.dir, "Experiment directory");
  defend->add_option("--seed", defend_seed, "Selection seed (default: config seed or 0)");
  defend->add_option("--workers", defend_c.workers, "Worker threads")->check(CLI::PositiveNumber);

  // evaluate / report
  auto* evaluate = app.add_subcommand("evaluate", "Score the models and write report.json");
  Common eval_c;
  evaluate->add_option("--dir", eval_c.dir, "Experiment directory");
  evaluate->add_option("--config", eval_c.config, "Experiment config (locates the directory)");
  evaluate->add_option("--workers", eval_c.workers, "Worker threads")->check(CLI::PositiveNumber);

  auto* report = app.add_subcommand("report", "Write CSV tables, checklist and manifest from report.json");
  Common report_c;
  report->add_option("--dir", report_c.dir, "Experiment directory");
  report->add_option("--config", report_c.config, "Experiment config (locates the directory)");

  // run
  auto* run_cmd = app.add_subcommand("run", "Run every stage from one config");
  Common run_c;
  std::optional<std::size_t> run_workers;
  run_cmd->add_option("--config", run_c.config, "Experiment config")->required();
  run_cmd->add_option("--out", run_c.dir, "Experiment directory (overrides output_dir)");
  run_cmd->add_option("--workers", run_workers, "Worker threads (overrides the config)")->check(CLI::PositiveNumber);

  auto* reference = app.add_subcommand("config-reference", "Print the config reference page");
  std::string reference_out;
  reference->add_option("--out", reference_out, "Write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  if (*ingest) {
    netadv::DataSettings data;
    fs::path dir = out_dir;
    if (const auto cfg = maybe_config(ingest_config)) {
      data = cfg->data;
      if (dir.empty()) dir = netadv::resolve_output_dir(*cfg);
    }
    if (!format.empty()) data.format = format;
    if (!in_path.empty()) data.path = in_path;
    if (!test_path.empty()) data.test_path = fs::path(test_path);
    if (ingest_config.empty()) {
      if (format.empty()) throw netadv::ValidationError("--format", "required without --config");
      if (in_path.empty()) throw netadv::ValidationError("--in", "required without --config");
      data.split = {fraction, ingest_seed};
      data.max_train_samples = max_train;
      data.max_test_samples = max_test;
    }
    if (dir.empty()) dir = netadv::output_root();
    const auto r = netadv::ingest(data, dir);
    std::cout << "ingested " << r.train_rows << " train / " << r.test_rows << " test rows, d = " << r.dim
              << ", excluded " << r.excluded << " -> " << dir.string() << '\n';
  } else if (*train) {
    auto cfg = netadv::load_config(train_c.config);
    if (!model_kind.empty()) cfg.model_kind = model_kind;
    if (!transfer_kind.empty()) {
      cfg.transfer_model = transfer_kind == "none" ? std::nullopt : std::optional(transfer_kind);
    }
    std::optional<netadv::TrainConfig> transfer;
    if (cfg.transfer_model) transfer = cfg.train_config_for(*cfg.transfer_model);
    const auto dir = pick_dir(train_c, cfg);
    netadv::train_stage(dir, cfg.train_config(), transfer);
    std::cout << "trained " << cfg.model_kind << " -> " << (dir / netadv::artifacts::kModel).string() << '\n';
  } else if (*attack) {
    std::optional<netadv::ExperimentConfig> cfg;
    netadv::AttackSettings settings;
    if (is_json(attack_spec)) {
      settings = attack_from_json(read_json_file(attack_spec));
    } else {
      cfg = netadv::load_config(attack_spec);
      if (!cfg->attack) throw netadv::ValidationError("attack", "the config has no [attack] section");
      settings = *cfg->attack;
    }
    fs::path dir = attack_c.dir;
    if (dir.empty()) dir = cfg ? netadv::resolve_output_dir(*cfg) : fs::path(checkpoint).parent_path();
    const std::uint64_t seed = attack_seed.value_or(cfg ? cfg->seed : 0);
    netadv::attack_stage(dir, settings, checkpoint, seed, attack_c.workers);
    std::cout << "examples -> " << (dir / netadv::artifacts::kExamples).string() << '\n';
  } else if (*defend) {
    std::optional<netadv::ExperimentConfig> cfg;
    netadv::DefenseSpec spec;
    if (is_json(defense_spec)) {
      spec = defense_from_json(read_json_file(defense_spec));
    } else {
      cfg = netadv::load_config(defense_spec);
      if (!cfg->defense) throw netadv::ValidationError("defense", "the config has no [defense] section");
      spec = *cfg->defense;
    }
    const auto dir = pick_dir(defend_c, cfg);
    netadv::defend_stage(dir, spec, defend_seed.value_or(cfg ? cfg->seed : 0), defend_c.workers);
    std::cout << "defense -> " << (dir / netadv::artifacts::kDefense).string() << '\n';
  } else if (*evaluate) {
    const auto dir = pick_dir(eval_c, maybe_config(eval_c.config));
    const auto r = netadv::evaluate_stage(dir, eval_c.workers);
    for (const auto& ev : r.evaluations) {
      std::cout << ev.name << ": accuracy " << ev.before.accuracy;
      if (ev.after) std::cout << " -> " << ev.after->accuracy << " under attack";
      std::cout << '\n';
    }
  } else if (*report) {
    const auto dir = pick_dir(report_c, maybe_config(report_c.config));
    netadv::report_stage(dir);
    std::cout << "report tables -> " << dir.string() << '\n';
  } else if (*run_cmd) {
    auto cfg = netadv::load_config(run_c.config);
    if (run_workers) cfg.workers = *run_workers;
    const fs::path dir = run_c.dir.empty() ? netadv::resolve_output_dir(cfg) : fs::path(run_c.dir);
    netadv::run_experiment(cfg, dir);
    std::cout << "artifacts -> " << dir.string() << '\n';
  } else if (*reference) {
    const auto page = netadv::config_reference_markdown();
    if (reference_out.empty()) {
      std::cout << page;
    } else {
      std::ofstream(reference_out) << page;
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const netadv::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const netadv::MissingArtifactError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const netadv::UnsupportedAttackError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
}

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "netadv/config.hpp"
#include "netadv/error.hpp"
#include "netadv/text.hpp"

namespace netadv {
namespace {

namespace fs = std::filesystem;
using boost::property_tree::ptree;

constexpr ConfigKey kKeys[] = {
    {"experiment", "name", "experiment", "Run name; names the default output directory."},
    {"experiment", "scenario", "ids-binary", "`ids-binary` (NSL-KDD Normal/DoS) or `traffic-10class` (Moore)."},
    {"experiment", "seed", "0", "Global seed: split, subsampling, initialization, batch order, attack and defense "
                                "sample selection."},
    {"experiment", "output_dir", "", "Artifact directory. Relative paths go under the output root; empty means "
                                     "`<root>/<name>`."},
    {"experiment", "workers", "1", "Worker threads for prediction and crafting. Never changes the output."},
    {"experiment", "transfer_model", "none", "`mlp`, `svm` or `none`: second model the examples are re-scored on."},
    {"data", "format", "", "`nslkdd` or `moore-arff`; empty takes the scenario's format."},
    {"data", "path", "", "Required. Dataset file, or a directory (NSL-KDD: KDDTrain+.txt and KDDTest+.txt; "
                         "Moore: every `*.arff` file, in name order)."},
    {"data", "test_path", "", "Separate test file. When set, no split is made."},
    {"data", "train_fraction", "0.8", "Training share of the stratified split, in (0, 1]."},
    {"data", "max_train_samples", "0", "Stratified cap on training rows, at least one per class; 0 = no cap."},
    {"data", "max_test_samples", "0", "Stratified cap on test rows; 0 = no cap."},
    {"model", "kind", "mlp", "Victim model: `mlp` or `svm`."},
    {"model", "epochs", "20", "MLP training epochs."},
    {"model", "batch_size", "64", "MLP mini-batch size."},
    {"model", "learning_rate", "0.01", "MLP SGD step size, constant."},
    {"model", "hidden", "100,100,100,100", "MLP hidden layer widths."},
    {"model", "C", "1", "SVM box constraint."},
    {"model", "gamma", "", "RBF width; empty means 1/d."},
    {"model", "tolerance", "0.001", "SMO stopping tolerance on the maximal KKT violation."},
    {"model", "cache_mb", "256", "SMO kernel cache size per binary machine."},
    {"model", "max_iterations", "0", "SMO iteration cap; 0 means max(10^7, 100 n)."},
    {"attack", "kind", "mi-l1", "`mi-l1`, `fgsm`, `bim`, `jsma`, or `none` to skip the attack."},
    {"attack", "epsilon", "0.01", "Per-feature perturbation bound in normalized units."},
    {"attack", "max_features", "2", "Feature budget k; `all` lets every feature move."},
    {"attack", "target", "", "Target class name (targeted attacks)."},
    {"attack", "source", "", "Class whose test samples are attacked; empty attacks every non-target sample."},
    {"attack", "specificity", "targeted", "`targeted` or `non-targeted`."},
    {"attack", "knowledge", "white-box", "`white-box`, `black-box-query` or `black-box-zero-query`; only "
                                         "white-box runs."},
    {"attack", "phase", "evasion", "`evasion` or `poisoning`; only evasion runs."},
    {"attack", "iterations", "10", "BIM steps; JSMA iteration cap."},
    {"attack", "step_size", "0.002", "BIM step size, at most epsilon."},
    {"attack", "theta", "0.01", "JSMA increment per iteration."},
    {"attack", "mi_bins", "10", "Equal-width bins for the mutual-information ranking."},
    {"attack", "max_examples", "0", "Seeded cap on attacked test samples; 0 = every candidate."},
    {"defense", "kind", "none", "`adversarial-training`, `feature-squeezing` or `none`."},
    {"defense", "mix_ratio", "0.5", "Adversarial share of the augmented training set, in [0, 1)."},
    {"defense", "bits", "5", "Feature-squeezing precision; 2^bits levels per feature."},
    {"defense", "retrain_on_squeezed", "false", "Also train the model on squeezed inputs."},
};

const ConfigKey* find_key(const std::string& section, const std::string& key) {
  for (const auto& k : kKeys) {
    if (section == k.section && key == k.key) return &k;
  }
  return nullptr;
}

class Reader {
 public:
  explicit Reader(const ptree& tree) : tree_(tree) {}

  bool has_section(const std::string& section) const { return tree_.get_child_optional(section).has_value(); }

  std::string str(const std::string& section, const std::string& key) const {
    const auto node = tree_.get_child_optional(section + '.' + key);
    if (node) return std::string(text::trim(node->data()));
    return find_key(section, key)->default_value;
  }

  bool is_set(const std::string& section, const std::string& key) const { return !str(section, key).empty(); }

  double real(const std::string& section, const std::string& key) const {
    const auto s = str(section, key);
    const auto v = text::parse_double(s);
    if (!v || !std::isfinite(*v)) throw ValidationError(section + '.' + key, "expected a number, got '" + s + "'");
    return *v;
  }

  std::uint64_t uint(const std::string& section, const std::string& key) const {
    const auto s = str(section, key);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
      throw ValidationError(section + '.' + key, "expected a nonnegative integer, got '" + s + "'");
    }
    return value;
  }

  bool boolean(const std::string& section, const std::string& key) const {
    const auto s = str(section, key);
    if (s == "true" || s == "yes" || s == "1") return true;
    if (s == "false" || s == "no" || s == "0") return false;
    throw ValidationError(section + '.' + key, "expected true or false, got '" + s + "'");
  }

  std::optional<std::string> optional_str(const std::string& section, const std::string& key) const {
    auto s = str(section, key);
    if (s.empty()) return std::nullopt;
    return s;
  }

 private:
  const ptree& tree_;
};

void reject_unknown_keys(const ptree& tree) {
  for (const auto& [section, child] : tree) {
    if (child.empty() && !child.data().empty()) throw ValidationError(section, "key outside of any section");
    bool known_section = false;
    for (const auto& k : kKeys) known_section = known_section || section == k.section;
    if (!known_section) throw ValidationError(section, "unknown section");
    for (const auto& [key, value] : child) {
      if (!find_key(section, key)) throw ValidationError(section + '.' + key, "unknown key");
    }
  }
}

fs::path resolve_path(const fs::path& p, const fs::path& base_dir) {
  return p.is_absolute() ? p : (base_dir / p).lexically_normal();
}

}  // namespace

std::string to_string(Scenario s) { return s == Scenario::kIdsBinary ? "ids-binary" : "traffic-10class"; }

Scenario parse_scenario(std::string_view s) {
  if (s == "ids-binary") return Scenario::kIdsBinary;
  if (s == "traffic-10class") return Scenario::kTraffic10Class;
  throw ValidationError("experiment.scenario",
                        "unknown value '" + std::string(s) + "' (expected one of: ids-binary, traffic-10class)");
}

std::string scenario_format(Scenario s) { return s == Scenario::kIdsBinary ? "nslkdd" : "moore-arff"; }

Scenario scenario_for_format(std::string_view format) {
  if (format == "nslkdd") return Scenario::kIdsBinary;
  if (format == "moore-arff") return Scenario::kTraffic10Class;
  throw ValidationError("data.format",
                        "unknown value '" + std::string(format) + "' (expected one of: nslkdd, moore-arff)");
}

std::vector<std::string> scenario_classes(Scenario s) {
  if (s == Scenario::kIdsBinary) return {kNormalClass, kDosClass};
  return moore_classes();
}

AttackSpec AttackSettings::resolve(const std::vector<std::string>& class_names) const {
  AttackSpec out = spec;
  auto lookup = [&](const std::optional<std::string>& name, const char* field) -> std::optional<std::size_t> {
    if (!name) return std::nullopt;
    const auto it = std::find(class_names.begin(), class_names.end(), *name);
    if (it == class_names.end()) throw ValidationError(field, "unknown class '" + *name + "'");
    return static_cast<std::size_t>(it - class_names.begin());
  };
  out.target_class = lookup(target, "attack.target");
  out.source_class = lookup(source, "attack.source");
  return out;
}

TrainConfig ExperimentConfig::train_config_for(const std::string& kind) const {
  if (kind == "mlp") {
    MlpConfig c = mlp;
    c.seed = seed;
    return c;
  }
  if (kind == "svm") return svm;
  throw ValidationError("model.kind", "unknown value '" + kind + "' (expected one of: mlp, svm)");
}

std::span<const ConfigKey> config_keys() { return kKeys; }

std::string config_reference_markdown() {
  std::ostringstream out;
  out << "# Experiment config reference\n\n"
      << "Experiment configs are INI files with the sections `[experiment]`, `[data]`, `[model]`, `[attack]` and "
         "`[defense]`. Unknown sections or keys are rejected with an error naming them. Omitting `[attack]` or "
         "`[defense]` skips that stage.\n\n"
      << "This page is generated by `netadv config-reference`.\n";
  std::string section;
  for (const auto& k : kKeys) {
    if (section != k.section) {
      section = k.section;
      out << "\n## [" << section << "]\n\n| key | default | meaning |\n|---|---|---|\n";
    }
    out << "| `" << k.key << "` | " << (*k.default_value ? std::string("`") + k.default_value + "`" : "(empty)")
        << " | " << k.description << " |\n";
  }
  return out.str();
}

ExperimentConfig parse_config(std::istream& in, const fs::path& base_dir) {
  ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ValidationError("config", "line " + std::to_string(e.line()) + ": " + e.message());
  }
  reject_unknown_keys(tree);
  const Reader r(tree);

  ExperimentConfig cfg;
  cfg.name = r.str("experiment", "name");
  if (cfg.name.empty() || cfg.name.find_first_of("/\\") != std::string::npos) {
    throw ValidationError("experiment.name", "must be a nonempty name without path separators");
  }
  cfg.scenario = parse_scenario(r.str("experiment", "scenario"));
  cfg.seed = r.uint("experiment", "seed");
  cfg.output_dir = r.str("experiment", "output_dir");
  cfg.workers = r.uint("experiment", "workers");
  if (cfg.workers == 0) throw ValidationError("experiment.workers", "must be at least 1");
  if (const auto t = r.str("experiment", "transfer_model"); t != "none") {
    if (t != "mlp" && t != "svm") {
      throw ValidationError("experiment.transfer_model", "unknown value '" + t + "' (expected one of: mlp, svm, none)");
    }
    cfg.transfer_model = t;
  }

  cfg.data.format = r.is_set("data", "format") ? r.str("data", "format") : scenario_format(cfg.scenario);
  if (!r.is_set("data", "path")) throw ValidationError("data.path", "required");
  cfg.data.path = resolve_path(r.str("data", "path"), base_dir);
  if (r.is_set("data", "test_path")) cfg.data.test_path = resolve_path(r.str("data", "test_path"), base_dir);
  cfg.data.split.train_fraction = r.real("data", "train_fraction");
  cfg.data.split.seed = cfg.seed;
  cfg.data.max_train_samples = r.uint("data", "max_train_samples");
  cfg.data.max_test_samples = r.uint("data", "max_test_samples");

  cfg.model_kind = r.str("model", "kind");
  cfg.mlp.epochs = r.uint("model", "epochs");
  cfg.mlp.batch_size = r.uint("model", "batch_size");
  cfg.mlp.learning_rate = r.real("model", "learning_rate");
  cfg.mlp.seed = cfg.seed;
  cfg.mlp.hidden.clear();
  for (auto tok : text::split(r.str("model", "hidden"), ',')) {
    const auto v = text::parse_double(tok);
    if (!v || *v < 1 || *v != static_cast<double>(static_cast<std::size_t>(*v))) {
      throw ValidationError("model.hidden", "expected a comma-separated list of positive widths");
    }
    cfg.mlp.hidden.push_back(static_cast<std::size_t>(*v));
  }
  cfg.svm.c = r.real("model", "C");
  if (r.is_set("model", "gamma")) cfg.svm.gamma = r.real("model", "gamma");
  cfg.svm.tolerance = r.real("model", "tolerance");
  cfg.svm.cache_mb = r.uint("model", "cache_mb");
  cfg.svm.max_iterations = r.uint("model", "max_iterations");

  if (r.has_section("attack") && r.str("attack", "kind") != "none") {
    AttackSettings a;
    a.spec.kind = parse_attack_kind(r.str("attack", "kind"));
    a.spec.epsilon = r.real("attack", "epsilon");
    const auto k = r.str("attack", "max_features");
    if (k == "all") {
      a.spec.max_features = std::nullopt;
    } else {
      a.spec.max_features = r.uint("attack", "max_features");
    }
    a.target = r.optional_str("attack", "target");
    a.source = r.optional_str("attack", "source");
    a.spec.specificity = parse_specificity(r.str("attack", "specificity"));
    a.spec.knowledge = parse_knowledge(r.str("attack", "knowledge"));
    a.spec.phase = parse_phase(r.str("attack", "phase"));
    a.spec.iterations = r.uint("attack", "iterations");
    a.spec.step_size = r.real("attack", "step_size");
    a.spec.theta = r.real("attack", "theta");
    a.spec.mi_bins = r.uint("attack", "mi_bins");
    a.max_examples = r.uint("attack", "max_examples");
    cfg.attack = std::move(a);
  }

  if (r.has_section("defense") && r.str("defense", "kind") != "none") {
    DefenseSpec d;
    d.kind = parse_defense_kind(r.str("defense", "kind"));
    d.mix_ratio = r.real("defense", "mix_ratio");
    d.bits = static_cast<unsigned>(std::min<std::uint64_t>(r.uint("defense", "bits"), 1000));
    d.retrain_on_squeezed = r.boolean("defense", "retrain_on_squeezed");
    cfg.defense = d;
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ValidationError("config", "cannot open '" + file.string() + "'");
  return parse_config(in, file.parent_path());
}

void validate(const ExperimentConfig& cfg) {
  if (scenario_for_format(cfg.data.format) != cfg.scenario) {
    throw ValidationError("data.format", "'" + cfg.data.format + "' does not match scenario " + to_string(cfg.scenario));
  }
  if (!fs::exists(cfg.data.path)) throw ValidationError("data.path", "'" + cfg.data.path.string() + "' does not exist");
  if (cfg.data.test_path && !fs::exists(*cfg.data.test_path)) {
    throw ValidationError("data.test_path", "'" + cfg.data.test_path->string() + "' does not exist");
  }
  if (!(cfg.data.split.train_fraction > 0.0 && cfg.data.split.train_fraction <= 1.0)) {
    throw ValidationError("data.train_fraction", "must lie in (0, 1]");
  }
  if (cfg.model_kind != "mlp" && cfg.model_kind != "svm") {
    throw ValidationError("model.kind", "unknown value '" + cfg.model_kind + "' (expected one of: mlp, svm)");
  }
  if (cfg.mlp.batch_size == 0) throw ValidationError("model.batch_size", "must be positive");
  if (!(cfg.mlp.learning_rate > 0.0)) throw ValidationError("model.learning_rate", "must be positive");
  if (cfg.mlp.hidden.empty()) throw ValidationError("model.hidden", "needs at least one layer");
  if (!(cfg.svm.c > 0.0)) throw ValidationError("model.C", "must be positive");
  if (cfg.svm.gamma && !(*cfg.svm.gamma > 0.0)) throw ValidationError("model.gamma", "must be positive");
  if (!(cfg.svm.tolerance > 0.0)) throw ValidationError("model.tolerance", "must be positive");
  if (cfg.svm.cache_mb == 0) throw ValidationError("model.cache_mb", "must be positive");

  const auto classes = scenario_classes(cfg.scenario);
  if (cfg.attack) {
    const AttackSpec spec = cfg.attack->resolve(classes);
    // max_features is checked against the encoded width once it is known.
    AttackSpec shape = spec;
    shape.max_features = std::nullopt;
    validate(shape, 1, classes.size());
    if (spec.max_features && *spec.max_features == 0) {
      throw ValidationError("attack.max_features", "must be at least 1");
    }
    if (spec.kind == AttackKind::kMiL1 && spec.specificity == Specificity::kNonTargeted && !spec.source_class) {
      throw ValidationError("attack.source", "non-targeted MI-L1 needs the source class");
    }
  }
  if (cfg.defense) {
    validate(*cfg.defense);
    if (cfg.defense->kind == DefenseKind::kAdversarialTraining && !cfg.attack) {
      throw ValidationError("defense.kind", "adversarial training needs an [attack] section");
    }
  }
}

fs::path output_root() {
  if (const char* root = std::getenv(kOutputRootEnv); root && *root) return root;
  return fs::current_path() / "netadv-out";
}

fs::path resolve_output_dir(const ExperimentConfig& cfg) {
  if (cfg.output_dir.empty()) return output_root() / cfg.name;
  if (cfg.output_dir.is_absolute()) return cfg.output_dir;
  return output_root() / cfg.output_dir;
}

}  // namespace netadv

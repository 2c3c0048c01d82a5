#include <algorithm>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "netadv/error.hpp"
#include "netadv/hash.hpp"
#include "netadv/stages.hpp"

namespace netadv {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::uint64_t kSubsampleSalt = 0x5eed'0000'5b5a'0001ULL;
constexpr std::uint64_t kExampleSalt = 0x5eed'0000'a77a'0001ULL;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifactError(path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

json read_json(const fs::path& path) {
  const auto body = read_text(path);
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw ValidationError(path.filename().string(), std::string("not valid JSON: ") + e.what());
  }
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

Checkpoint read_checkpoint(const fs::path& path) {
  std::istringstream in(read_text(path));
  return load_checkpoint(in);
}

void write_checkpoint(const fs::path& path, const Checkpoint& cp) {
  std::ostringstream out;
  save_checkpoint(out, cp);
  write_text(path, out.str());
}

// Seeded per-class cap that keeps every present class represented.
std::vector<std::size_t> stratified_cap(std::span<const std::size_t> labels, std::size_t num_classes,
                                        std::size_t cap, std::uint64_t seed) {
  std::vector<std::size_t> all(labels.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  if (cap == 0 || labels.size() <= cap) return all;
  const double fraction = static_cast<double>(cap) / static_cast<double>(labels.size());
  std::vector<std::vector<std::size_t>> by_class(num_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  std::mt19937_64 rng(seed ^ kSubsampleSalt);
  std::vector<std::size_t> out;
  for (auto& rows : by_class) {
    if (rows.empty()) continue;
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto wanted = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(rows.size())));
    const std::size_t take = std::clamp<std::size_t>(wanted, 1, rows.size());
    out.insert(out.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(take));
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct SourceData {
  Schema schema;
  std::vector<RawRecord> records;
  std::size_t excluded = 0;
  json inputs = json::array();
};

void add_input(SourceData& src, const fs::path& file, const std::string& body) {
  src.inputs.push_back({{"file", file.filename().string()}, {"sha256", sha256_hex(body)}});
}

SourceData read_nslkdd(const fs::path& file) {
  SourceData src;
  src.schema = nslkdd_schema();
  const auto body = read_text(file);
  add_input(src, file, body);
  std::istringstream in(body);
  const auto records = parse_nslkdd(in);
  auto filtered = filter_binary(records, {"normal"}, nslkdd_dos_labels());
  src.records = std::move(filtered.records);
  src.excluded = filtered.excluded;
  return src;
}

std::vector<fs::path> arff_files(const fs::path& path) {
  if (!fs::is_directory(path)) return {path};
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(path)) {
    if (entry.is_regular_file() && entry.path().extension() == ".arff") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ValidationError("data.path", "no .arff files in '" + path.string() + "'");
  return files;
}

SourceData read_moore(const std::vector<fs::path>& files) {
  SourceData src;
  bool first = true;
  for (const auto& file : files) {
    const auto body = read_text(file);
    add_input(src, file, body);
    std::istringstream in(body);
    ArffData data;
    try {
      data = parse_moore(in);
    } catch (const ParseError& e) {
      const std::string what = e.what();
      throw ParseError(e.line(), file.filename().string() + ": " + what.substr(what.find(": ") + 2));
    }
    if (first) {
      src.schema = data.schema;
      first = false;
    } else if (data.schema.attributes.size() != src.schema.attributes.size()) {
      throw ValidationError("data.path", file.filename().string() + " declares a different attribute list");
    }
    for (auto& r : data.records) {
      try {
        r.label = moore_category(r.label);
      } catch (const std::out_of_range&) {
        throw ValidationError("data.path", file.filename().string() + ": unknown class '" + r.label + "'");
      }
      src.records.push_back(std::move(r));
    }
  }
  src.schema.label_vocabulary = moore_classes();
  return src;
}

std::vector<std::size_t> label_indices(std::span<const RawRecord> records, const std::vector<std::string>& classes) {
  std::vector<std::size_t> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const auto it = std::find(classes.begin(), classes.end(), r.label);
    if (it == classes.end()) throw ValidationError("data", "unexpected class '" + r.label + "'");
    out.push_back(static_cast<std::size_t>(it - classes.begin()));
  }
  return out;
}

template <typename T>
std::vector<T> pick(const std::vector<T>& values, std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(values[i]);
  return out;
}

json counts_json(const Dataset& d) { return d.class_counts(); }

void check_compatible(const Checkpoint& cp, const StoredDataset& ds, const fs::path& path) {
  if (cp.class_names != ds.train.class_names) {
    throw ValidationError(path.filename().string(), "class names differ from the ingested dataset");
  }
  if (cp.norm_fingerprint != ds.info.at("norm_fingerprint").get<std::string>()) {
    throw ValidationError(path.filename().string(), "model was trained under a different normalization");
  }
  if (as_classifier(cp.model).input_dim() != ds.train.dim()) {
    throw DimensionError(ds.train.dim(), as_classifier(cp.model).input_dim());
  }
}

std::string describe(const Checkpoint& cp) { return model_kind(cp.model); }

std::optional<ClassProfile> profile_for(const Dataset& train, const AttackSpec& spec) {
  if (spec.kind != AttackKind::kMiL1) return std::nullopt;
  return build_profile(train, spec);
}

void remove_if_present(const fs::path& path) {
  std::error_code ec;
  fs::remove(path, ec);
}

}  // namespace

IngestResult ingest(const DataSettings& data, const fs::path& dir) {
  const Scenario scenario = scenario_for_format(data.format);
  const auto classes = scenario_classes(scenario);
  if (!fs::exists(data.path)) throw ValidationError("data.path", "'" + data.path.string() + "' does not exist");
  if (!(data.split.train_fraction > 0.0 && data.split.train_fraction <= 1.0)) {
    throw ValidationError("data.train_fraction", "must lie in (0, 1]");
  }

  std::optional<fs::path> test_path = data.test_path;
  SourceData train_src;
  if (scenario == Scenario::kIdsBinary) {
    fs::path train_file = data.path;
    if (fs::is_directory(data.path)) {
      train_file = data.path / "KDDTrain+.txt";
      if (!test_path && fs::exists(data.path / "KDDTest+.txt")) test_path = data.path / "KDDTest+.txt";
    }
    if (!fs::exists(train_file)) throw ValidationError("data.path", "'" + train_file.string() + "' does not exist");
    train_src = read_nslkdd(train_file);
  } else {
    train_src = read_moore(arff_files(data.path));
  }

  std::vector<RawRecord> train_records;
  std::vector<RawRecord> test_records;
  json test_inputs = nullptr;
  std::size_t excluded = train_src.excluded;
  if (test_path) {
    SourceData test_src = scenario == Scenario::kIdsBinary ? read_nslkdd(*test_path) : read_moore(arff_files(*test_path));
    excluded += test_src.excluded;
    test_inputs = test_src.inputs;
    train_records = std::move(train_src.records);
    test_records = std::move(test_src.records);
  } else {
    const auto labels = label_indices(train_src.records, classes);
    const auto part = stratified_partition(labels, classes.size(), data.split);
    train_records = pick(train_src.records, part.train);
    test_records = pick(train_src.records, part.test);
  }
  train_records = pick(train_records, stratified_cap(label_indices(train_records, classes), classes.size(),
                                                     data.max_train_samples, data.split.seed));
  test_records = pick(test_records, stratified_cap(label_indices(test_records, classes), classes.size(),
                                                   data.max_test_samples, data.split.seed + 1));
  if (train_records.empty()) throw ValidationError("data", "no training records for the scenario's classes");

  const auto encoder = OneHotEncoder::fit(train_src.schema, train_records, classes);
  Dataset train = encoder.transform(train_records);
  Dataset test = encoder.transform(test_records);
  const NormParams norm = fit_norm_params(train);
  train = normalize(std::move(train), norm);
  test = normalize(std::move(test), norm);

  IngestResult result;
  result.train_rows = train.rows();
  result.test_rows = test.rows();
  result.dim = train.dim();
  result.excluded = excluded;
  result.width_warning = scenario == Scenario::kIdsBinary && train.dim() != kReferenceIdsWidth;
  if (result.width_warning) {
    std::cerr << "warning: encoded width " << train.dim() << " differs from the reference width "
              << kReferenceIdsWidth << '\n';
  }

  json columns = json::array();
  for (const auto& c : encoder.columns()) {
    json col = {{"name", c.name}, {"kind", c.kind == AttributeKind::kNumeric ? "numeric" : "categorical"}};
    if (c.kind == AttributeKind::kNumeric) {
      col["median"] = c.median;
    } else {
      col["vocabulary"] = c.vocabulary;
    }
    columns.push_back(std::move(col));
  }
  const json info = {
      {"format", "netadv-dataset"},
      {"version", 1},
      {"scenario", to_string(scenario)},
      {"source_format", data.format},
      {"inputs", train_src.inputs},
      {"test_inputs", test_inputs},
      {"split",
       {{"train_fraction", data.split.train_fraction},
        {"seed", data.split.seed},
        {"separate_test_file", test_path.has_value()}}},
      {"max_train_samples", data.max_train_samples},
      {"max_test_samples", data.max_test_samples},
      {"excluded_records", excluded},
      {"train_rows", result.train_rows},
      {"test_rows", result.test_rows},
      {"dim", result.dim},
      {"width_warning", result.width_warning},
      {"class_names", classes},
      {"class_counts", {{"train", counts_json(train)}, {"test", counts_json(test)}}},
      {"feature_names", train.feature_names},
      {"norm_params", {{"min", norm.min}, {"max", norm.max}}},
      {"norm_fingerprint", norm_fingerprint(norm)},
      {"encoder", columns}};

  fs::create_directories(dir);
  std::ostringstream train_csv;
  write_dataset_csv(train_csv, train);
  write_text(dir / artifacts::kTrain, train_csv.str());
  std::ostringstream test_csv;
  write_dataset_csv(test_csv, test);
  write_text(dir / artifacts::kTest, test_csv.str());
  write_json(dir / artifacts::kDataset, info);
  return result;
}

StoredDataset load_stored_dataset(const fs::path& dir) {
  StoredDataset out;
  out.info = read_json(dir / artifacts::kDataset);
  try {
    const auto classes = out.info.at("class_names").get<std::vector<std::string>>();
    NormParams norm{out.info.at("norm_params").at("min").get<std::vector<double>>(),
                    out.info.at("norm_params").at("max").get<std::vector<double>>()};
    const auto names = out.info.at("feature_names").get<std::vector<std::string>>();
    for (auto [file, target] : {std::pair{artifacts::kTrain, &out.train}, std::pair{artifacts::kTest, &out.test}}) {
      std::istringstream in(read_text(dir / file));
      *target = read_dataset_csv(in, classes);
      if (target->feature_names != names) {
        throw ValidationError(file, "feature columns differ from dataset.json");
      }
      target->norm_params = norm;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(artifacts::kDataset, e.what());
  }
  return out;
}

void train_stage(const fs::path& dir, const TrainConfig& cfg, const std::optional<TrainConfig>& transfer) {
  const auto ds = load_stored_dataset(dir);
  const std::string fingerprint = ds.info.at("norm_fingerprint").get<std::string>();
  auto save = [&](const fs::path& path, const TrainConfig& c) {
    write_checkpoint(path, {train_model(ds.train, c), ds.train.class_names, fingerprint, to_json(c)});
  };
  save(dir / artifacts::kModel, cfg);
  if (transfer) {
    save(dir / artifacts::kTransferModel, *transfer);
  } else {
    remove_if_present(dir / artifacts::kTransferModel);
  }
}

void attack_stage(const fs::path& dir, const AttackSettings& attack, const fs::path& checkpoint, std::uint64_t seed,
                  std::size_t workers) {
  const auto ds = load_stored_dataset(dir);
  const std::string checkpoint_body = read_text(checkpoint);
  std::istringstream cp_in(checkpoint_body);
  const Checkpoint cp = load_checkpoint(cp_in);
  check_compatible(cp, ds, checkpoint);
  const auto& classes = ds.train.class_names;

  const AttackSpec spec = attack.resolve(classes);
  require_executable(spec);
  validate(spec, ds.train.dim(), classes.size());

  auto candidates = attack_candidates(ds.test, spec);
  const std::size_t eligible = candidates.size();
  if (attack.max_examples > 0 && candidates.size() > attack.max_examples) {
    std::mt19937_64 rng(seed ^ kExampleSalt);
    std::shuffle(candidates.begin(), candidates.end(), rng);
    candidates.resize(attack.max_examples);
    std::sort(candidates.begin(), candidates.end());
  }
  const auto profile = profile_for(ds.train, spec);
  const auto examples =
      craft_batch(as_classifier(cp.model), ds.test, candidates, spec, profile ? &*profile : nullptr, workers);

  std::ostringstream csv;
  write_examples_csv(csv, examples, ds.test);
  write_text(dir / artifacts::kExamples, csv.str());

  json profile_json = nullptr;
  if (profile) {
    json names = json::array();
    for (std::size_t i : profile->feature_indices) names.push_back(ds.train.feature_names[i]);
    profile_json = {{"feature_indices", profile->feature_indices}, {"features", names}, {"values", profile->values}};
  }
  const auto succeeded = std::count_if(examples.begin(), examples.end(), [](const auto& ex) { return ex.succeeded; });
  write_json(dir / artifacts::kAttackSpec,
             {{"format", "netadv-attack"},
              {"version", 1},
              {"spec", to_json(spec, classes)},
              {"max_examples", attack.max_examples},
              {"seed", seed},
              {"model", {{"file", checkpoint.filename().string()}, {"sha256", sha256_hex(checkpoint_body)}}},
              {"eligible", eligible},
              {"attempted", examples.size()},
              {"succeeded", succeeded},
              {"profile", profile_json}});
}

void defend_stage(const fs::path& dir, const DefenseSpec& defense, std::uint64_t seed, std::size_t workers) {
  validate(defense);
  const auto ds = load_stored_dataset(dir);
  const fs::path base_path = dir / artifacts::kModel;
  const Checkpoint base = read_checkpoint(base_path);
  check_compatible(base, ds, base_path);
  const TrainConfig cfg = train_config_from_json(base.train_config, model_kind(base.model));
  const std::string fingerprint = base.norm_fingerprint;

  json info = {{"format", "netadv-defense"},
               {"version", 1},
               {"spec", to_json(defense)},
               {"seed", seed},
               {"base_model", artifacts::kModel}};
  std::optional<Model> defended;
  if (defense.kind == DefenseKind::kAdversarialTraining) {
    const json attack_info = read_json(dir / artifacts::kAttackSpec);
    const AttackSpec spec = attack_spec_from_json(attack_info.at("spec"), ds.train.class_names);
    auto result = adversarial_training(ds.train, spec, cfg, defense, seed, workers);
    info["attack"] = attack_info.at("spec");
    info["adversarial_rows"] = result.source_rows.size();
    info["adversarial_succeeded"] = result.succeeded;
    defended = std::move(result.model);
  } else if (defense.retrain_on_squeezed) {
    defended = train_model(squeeze_dataset(ds.train, defense.bits), cfg);
  }
  if (defended) {
    write_checkpoint(dir / artifacts::kDefendedModel, {std::move(*defended), ds.train.class_names, fingerprint,
                                                       to_json(cfg)});
    info["defended_model"] = artifacts::kDefendedModel;
  } else {
    remove_if_present(dir / artifacts::kDefendedModel);
    info["defended_model"] = nullptr;
  }
  write_json(dir / artifacts::kDefense, info);
}

EvaluationReport evaluate_stage(const fs::path& dir, std::size_t workers) {
  const auto ds = load_stored_dataset(dir);
  const fs::path model_path = dir / artifacts::kModel;
  const Checkpoint base = read_checkpoint(model_path);
  check_compatible(base, ds, model_path);
  const auto& classes = ds.train.class_names;

  EvaluationReport report;
  report.class_names = classes;

  std::optional<std::vector<AdversarialExample>> examples;
  std::optional<AttackSpec> spec;
  json attack_info = nullptr;
  if (fs::exists(dir / artifacts::kExamples)) {
    attack_info = read_json(dir / artifacts::kAttackSpec);
    spec = attack_spec_from_json(attack_info.at("spec"), classes);
    std::istringstream in(read_text(dir / artifacts::kExamples));
    examples = read_examples_csv(in, ds.test);
  }
  const auto* ex_ptr = examples ? &*examples : nullptr;
  const auto* spec_ptr = spec ? &*spec : nullptr;
  report.evaluations.push_back(
      evaluate_model("undefended", describe(base), as_classifier(base.model), ds.test, ex_ptr, spec_ptr, workers));

  json defense_info = nullptr;
  bool adaptive = false;
  if (fs::exists(dir / artifacts::kDefense)) {
    defense_info = read_json(dir / artifacts::kDefense);
    const DefenseSpec defense = defense_spec_from_json(defense_info.at("spec"));
    std::optional<Checkpoint> trained;
    if (!defense_info.at("defended_model").is_null()) {
      const fs::path p = dir / artifacts::kDefendedModel;
      trained = read_checkpoint(p);
      check_compatible(*trained, ds, p);
    }
    const Classifier& inner = as_classifier(trained ? trained->model : base.model);
    std::optional<SqueezedClassifier> squeezed;
    std::string description = describe(trained ? *trained : base);
    if (defense.kind == DefenseKind::kFeatureSqueezing) {
      squeezed.emplace(inner, defense.bits);
      description += "+squeeze(" + std::to_string(defense.bits) + ")";
    } else {
      description += "+adversarial-training";
    }
    const Classifier& defended = squeezed ? static_cast<const Classifier&>(*squeezed) : inner;
    report.evaluations.push_back(evaluate_model("defended", description, defended, ds.test, ex_ptr, spec_ptr, workers));

    if (examples) {
      std::vector<std::size_t> rows;
      for (const auto& ex : *examples) rows.push_back(ex.source_index);
      try {
        const auto profile = profile_for(ds.train, *spec);
        const auto recrafted =
            craft_batch(defended, ds.test, rows, *spec, profile ? &*profile : nullptr, workers);
        report.evaluations.push_back(
            evaluate_model("defended-adaptive", description, defended, ds.test, &recrafted, spec_ptr, workers));
        adaptive = true;
      } catch (const UnsupportedAttackError&) {
        // The attack cannot see through this defense; only transferred examples are scored.
      }
    }
  }

  bool transferred = false;
  json transfer_model = nullptr;
  if (fs::exists(dir / artifacts::kTransferModel)) {
    const fs::path p = dir / artifacts::kTransferModel;
    const Checkpoint other = read_checkpoint(p);
    check_compatible(other, ds, p);
    transfer_model = {{"kind", model_kind(other.model)}, {"train_config", other.train_config}};
    if (examples) {
      report.transfer = TransferSummary{describe(base), describe(other),
                                        transfer(*examples, as_classifier(other.model), *spec)};
      transferred = true;
    }
  }

  report.metadata = {
      {"dataset",
       {{"scenario", ds.info.at("scenario")},
        {"source_format", ds.info.at("source_format")},
        {"inputs", ds.info.at("inputs")},
        {"test_inputs", ds.info.at("test_inputs")},
        {"dim", ds.info.at("dim")},
        {"train_rows", ds.info.at("train_rows")},
        {"test_rows", ds.info.at("test_rows")},
        {"split", ds.info.at("split")}}},
      {"model", {{"kind", model_kind(base.model)}, {"train_config", base.train_config}}},
      {"transfer_model", transfer_model},
      {"attack", attack_info},
      {"defense", defense_info}};
  report.checklist = defense_checklist({spec_ptr, !defense_info.is_null(), adaptive, transferred});
  write_json(dir / artifacts::kReport, to_json(report));
  return report;
}

void report_stage(const fs::path& dir) {
  const EvaluationReport report = evaluation_report_from_json(read_json(dir / artifacts::kReport));
  for (const auto& ev : report.evaluations) {
    const std::string prefix = ev.name == "undefended" ? "" : ev.name + "_";
    std::ostringstream before;
    write_confusion_csv(before, ev.before, report.class_names);
    write_text(dir / (prefix + artifacts::kConfusionBefore), before.str());
    if (ev.after) {
      std::ostringstream after;
      write_confusion_csv(after, *ev.after, report.class_names);
      write_text(dir / (prefix + artifacts::kConfusionAfter), after.str());
    }
  }
  std::ostringstream chart;
  write_chart_csv(chart, report);
  write_text(dir / artifacts::kChart, chart.str());
  std::ostringstream per_class;
  write_per_class_csv(per_class, report);
  write_text(dir / artifacts::kPerClass, per_class.str());
  std::ostringstream checklist;
  write_checklist_markdown(checklist, report);
  write_text(dir / artifacts::kChecklist, checklist.str());

  // Canonical experiment description, rebuilt from the stage sidecars so that
  // staged and one-shot runs agree.
  const json dataset = read_json(dir / artifacts::kDataset);
  const auto& meta = report.metadata;
  json attack = nullptr;
  json defense = nullptr;
  json seeds = {{"split", dataset.at("split").at("seed")},
                {"model", meta.at("model").at("train_config").value("seed", json(nullptr))},
                {"attack", nullptr},
                {"defense", nullptr}};
  if (!meta.at("attack").is_null()) {
    attack = {{"spec", meta.at("attack").at("spec")}, {"max_examples", meta.at("attack").at("max_examples")}};
    seeds["attack"] = meta.at("attack").at("seed");
  }
  if (!meta.at("defense").is_null()) {
    defense = meta.at("defense").at("spec");
    seeds["defense"] = meta.at("defense").at("seed");
  }
  const json config = {{"data",
                        {{"scenario", dataset.at("scenario")},
                         {"source_format", dataset.at("source_format")},
                         {"inputs", dataset.at("inputs")},
                         {"test_inputs", dataset.at("test_inputs")},
                         {"split", dataset.at("split")},
                         {"max_train_samples", dataset.at("max_train_samples")},
                         {"max_test_samples", dataset.at("max_test_samples")}}},
                       {"model", meta.at("model")},
                       {"transfer_model", meta.at("transfer_model")},
                       {"attack", attack},
                       {"defense", defense}};
  json hashes = json::object();
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (!entry.is_regular_file() || name == artifacts::kManifest) continue;
    hashes[name] = sha256_hex(read_text(entry.path()));
  }
  write_json(dir / artifacts::kManifest, {{"format", "netadv-manifest"},
                                          {"version", 1},
                                          {"seeds", seeds},
                                          {"config", config},
                                          {"config_sha256", sha256_hex(config.dump())},
                                          {"artifacts", hashes}});
}

void run_experiment(const ExperimentConfig& cfg, const fs::path& dir) {
  validate(cfg);
  fs::create_directories(dir);
  for (const char* name : {artifacts::kExamples, artifacts::kAttackSpec, artifacts::kDefense,
                           artifacts::kDefendedModel, artifacts::kTransferModel, artifacts::kReport}) {
    remove_if_present(dir / name);
  }
  // Confusion tables of evaluations the previous run had and this one may not.
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.find("confusion_") != std::string::npos && name.ends_with(".csv")) {
      fs::remove(entry.path());
    }
  }
  ingest(cfg.data, dir);
  std::optional<TrainConfig> transfer;
  if (cfg.transfer_model) transfer = cfg.train_config_for(*cfg.transfer_model);
  train_stage(dir, cfg.train_config(), transfer);
  if (cfg.attack) attack_stage(dir, *cfg.attack, dir / artifacts::kModel, cfg.seed, cfg.workers);
  if (cfg.defense) defend_stage(dir, *cfg.defense, cfg.seed, cfg.workers);
  evaluate_stage(dir, cfg.workers);
  report_stage(dir);
}

}  // namespace netadv

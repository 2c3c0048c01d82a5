#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "netadv/config.hpp"
#include "netadv/report.hpp"

namespace netadv {

// Artifact names inside an experiment directory.
namespace artifacts {
inline constexpr const char* kTrain = "train.csv";
inline constexpr const char* kTest = "test.csv";
inline constexpr const char* kDataset = "dataset.json";
inline constexpr const char* kModel = "model.json";
inline constexpr const char* kTransferModel = "model_transfer.json";
inline constexpr const char* kExamples = "adversarial.csv";
inline constexpr const char* kAttackSpec = "attack_spec.json";
inline constexpr const char* kDefense = "defense.json";
inline constexpr const char* kDefendedModel = "model_defended.json";
inline constexpr const char* kReport = "report.json";
inline constexpr const char* kConfusionBefore = "confusion_before.csv";
inline constexpr const char* kConfusionAfter = "confusion_after.csv";
inline constexpr const char* kChart = "chart.csv";
inline constexpr const char* kPerClass = "per_class.csv";
inline constexpr const char* kChecklist = "checklist.md";
inline constexpr const char* kManifest = "manifest.json";
}  // namespace artifacts

struct IngestResult {
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::size_t dim = 0;
  std::size_t excluded = 0;  // records outside the scenario's classes
  bool width_warning = false;  // ids-binary width differs from the reference width
};

// Parses, filters, splits, subsamples, encodes and normalizes a dataset, then
// writes train.csv, test.csv and dataset.json into `dir`.
IngestResult ingest(const DataSettings& data, const std::filesystem::path& dir);

// Loaded train/test pair with class names and normalization from dataset.json.
struct StoredDataset {
  Dataset train;
  Dataset test;
  nlohmann::json info;
};
StoredDataset load_stored_dataset(const std::filesystem::path& dir);

// Trains the victim (and optionally a transfer model) on train.csv.
void train_stage(const std::filesystem::path& dir, const TrainConfig& cfg,
                 const std::optional<TrainConfig>& transfer = std::nullopt);

// Crafts examples for the test set against `checkpoint` and writes
// adversarial.csv plus the attack_spec.json sidecar.
void attack_stage(const std::filesystem::path& dir, const AttackSettings& attack,
                  const std::filesystem::path& checkpoint, std::uint64_t seed, std::size_t workers = 1);

// Builds the defended model described by `defense`; writes defense.json and,
// when the defense trains a model, model_defended.json.
void defend_stage(const std::filesystem::path& dir, const DefenseSpec& defense, std::uint64_t seed,
                  std::size_t workers = 1);

// Scores every available model and writes report.json. Without
// adversarial.csv the report holds clean results only.
EvaluationReport evaluate_stage(const std::filesystem::path& dir, std::size_t workers = 1);

// Projects report.json into the CSV tables and checklist, then writes the
// manifest. Nothing is recomputed.
void report_stage(const std::filesystem::path& dir);

// All stages in order into `dir`.
void run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& dir);

}  // namespace netadv

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "netadv/attacks.hpp"
#include "netadv/checkpoint.hpp"
#include "netadv/defenses.hpp"

namespace netadv {

enum class Scenario { kIdsBinary, kTraffic10Class };

std::string to_string(Scenario s);
Scenario parse_scenario(std::string_view s);
// "nslkdd" for ids-binary, "moore-arff" for traffic-10class.
std::string scenario_format(Scenario s);
Scenario scenario_for_format(std::string_view format);

// Class names each scenario produces, in index order.
std::vector<std::string> scenario_classes(Scenario s);

struct DataSettings {
  std::string format = "nslkdd";
  std::filesystem::path path;  // file, or directory holding the dataset files
  std::optional<std::filesystem::path> test_path;
  SplitSpec split;
  std::size_t max_train_samples = 0;  // 0 = no cap
  std::size_t max_test_samples = 0;
};

// AttackSpec with classes still named; they are resolved once the dataset is known.
struct AttackSettings {
  AttackSpec spec;
  std::optional<std::string> target;
  std::optional<std::string> source;
  std::size_t max_examples = 0;  // 0 = every candidate

  // Throws ValidationError when a named class is not in `class_names`.
  AttackSpec resolve(const std::vector<std::string>& class_names) const;
};

struct ExperimentConfig {
  std::string name = "experiment";
  Scenario scenario = Scenario::kIdsBinary;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir;  // empty = default under the output root
  std::size_t workers = 1;
  std::optional<std::string> transfer_model;  // "mlp" or "svm"
  DataSettings data;
  std::string model_kind = "mlp";
  MlpConfig mlp;
  SvmConfig svm;
  std::optional<AttackSettings> attack;
  std::optional<DefenseSpec> defense;

  TrainConfig train_config() const { return train_config_for(model_kind); }
  TrainConfig train_config_for(const std::string& kind) const;
};

struct ConfigKey {
  const char* section;
  const char* key;
  const char* default_value;
  const char* description;
};

std::span<const ConfigKey> config_keys();

// Markdown reference page listing every key with its default.
std::string config_reference_markdown();

// Parses the INI text. Relative data paths are resolved against `base_dir`.
// Throws ValidationError naming the offending "section.key".
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& file);

// Checks cross-key constraints and that referenced paths exist.
void validate(const ExperimentConfig& cfg);

// Name of the environment variable holding the default output root.
inline constexpr const char* kOutputRootEnv = "NETADV_OUTPUT_ROOT";

// Output root: $NETADV_OUTPUT_ROOT, else "netadv-out" in the working directory.
std::filesystem::path output_root();
// The config's output_dir (relative ones are placed under the output root), or
// output_root()/<name> when unset.
std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg);

}  // namespace netadv

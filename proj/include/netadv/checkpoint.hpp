#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "netadv/mlp.hpp"
#include "netadv/svm.hpp"

namespace netadv {

using Model = std::variant<MlpModel, SvmModel>;
using TrainConfig = std::variant<MlpConfig, SvmConfig>;

// Trains the model family selected by the config alternative.
Model train_model(const Dataset& train, const TrainConfig& cfg);

const Classifier& as_classifier(const Model& model);
std::string model_kind(const Model& model);  // "mlp" or "svm"

// Stable fingerprint of the normalization a model was trained under.
std::string norm_fingerprint(const NormParams& params);

nlohmann::json to_json(const MlpConfig& cfg);
nlohmann::json to_json(const SvmConfig& cfg);
nlohmann::json to_json(const TrainConfig& cfg);
// `kind` is "mlp" or "svm"; throws ValidationError on missing or mistyped keys.
TrainConfig train_config_from_json(const nlohmann::json& j, const std::string& kind);

struct Checkpoint {
  Model model;
  std::vector<std::string> class_names;
  std::string norm_fingerprint;
  nlohmann::json train_config;
};

// JSON container: format tag, architecture, parameters, class names,
// normalization fingerprint and the training config.
void save_checkpoint(std::ostream& out, const Checkpoint& checkpoint);

// Throws ValidationError when the stored shapes are inconsistent.
Checkpoint load_checkpoint(std::istream& in);

}  // namespace netadv

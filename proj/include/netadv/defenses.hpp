#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "netadv/attacks.hpp"
#include "netadv/checkpoint.hpp"

namespace netadv {

enum class DefenseKind { kAdversarialTraining, kFeatureSqueezing };

std::string to_string(DefenseKind kind);
DefenseKind parse_defense_kind(std::string_view s);

struct DefenseSpec {
  DefenseKind kind = DefenseKind::kFeatureSqueezing;
  // Share of adversarial rows in the augmented training set, in [0, 1).
  double mix_ratio = 0.5;
  unsigned bits = 5;
  // Feature squeezing only: also train the model on squeezed inputs.
  bool retrain_on_squeezed = false;
};

// Throws ValidationError naming the defense.* field.
void validate(const DefenseSpec& spec);

nlohmann::json to_json(const DefenseSpec& spec);
DefenseSpec defense_spec_from_json(const nlohmann::json& j);

// Rounds every coordinate to the nearest of 2^bits evenly spaced levels in [0, 1].
std::vector<double> feature_squeeze(std::span<const double> x, unsigned bits);
Dataset squeeze_dataset(Dataset data, unsigned bits);

// Squeezes inputs before handing them to `inner`, which must outlive the wrapper.
class SqueezedClassifier final : public Classifier {
 public:
  SqueezedClassifier(const Classifier& inner, unsigned bits);

  std::size_t input_dim() const override { return inner_->input_dim(); }
  std::size_t num_classes() const override { return inner_->num_classes(); }
  Vector scores(std::span<const double> x) const override;
  Vector distribution(std::span<const double> x) const override;

  unsigned bits() const { return bits_; }

 private:
  const Classifier* inner_;
  unsigned bits_;
};

// Number of adversarial rows added to n clean rows so that they make up
// `mix_ratio` of the augmented set, capped at `candidates`.
std::size_t adversarial_row_count(std::size_t n, double mix_ratio, std::size_t candidates);

struct AdversarialTrainingResult {
  Model model;
  std::vector<std::size_t> source_rows;  // training rows that were attacked
  std::size_t succeeded = 0;             // examples that fooled the reference model
};

// Trains a reference model, crafts `attack` examples against it for a seeded
// selection of training rows, appends them with their true labels and retrains
// from scratch with the same config. mix_ratio = 0 returns exactly the model
// standard training produces.
AdversarialTrainingResult adversarial_training(const Dataset& train, const AttackSpec& attack,
                                               const TrainConfig& model_cfg, const DefenseSpec& defense,
                                               std::uint64_t seed, std::size_t workers = 1);

}  // namespace netadv

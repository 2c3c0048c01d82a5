#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "netadv/defenses.hpp"
#include "netadv/error.hpp"

namespace netadv {
namespace {

using nlohmann::json;

constexpr std::pair<DefenseKind, const char*> kKinds[] = {
    {DefenseKind::kAdversarialTraining, "adversarial-training"},
    {DefenseKind::kFeatureSqueezing, "feature-squeezing"}};

// Mixed into the experiment seed so the row selection does not reuse the
// initialization stream.
constexpr std::uint64_t kSelectionSalt = 0x5eed'adf0'0000'0001ULL;

}  // namespace

std::string to_string(DefenseKind kind) {
  for (const auto& [value, name] : kKinds) {
    if (value == kind) return name;
  }
  return "?";
}

DefenseKind parse_defense_kind(std::string_view s) {
  for (const auto& [value, name] : kKinds) {
    if (s == name) return value;
  }
  throw ValidationError("defense.kind", "unknown value '" + std::string(s) +
                                            "' (expected one of: adversarial-training, feature-squeezing)");
}

void validate(const DefenseSpec& spec) {
  if (!(spec.mix_ratio >= 0.0 && spec.mix_ratio < 1.0)) {
    throw ValidationError("defense.mix_ratio", "must lie in [0, 1)");
  }
  if (spec.bits < 1 || spec.bits > 52) throw ValidationError("defense.bits", "must lie in [1, 52]");
}

json to_json(const DefenseSpec& spec) {
  return {{"kind", to_string(spec.kind)},
          {"mix_ratio", spec.mix_ratio},
          {"bits", spec.bits},
          {"retrain_on_squeezed", spec.retrain_on_squeezed}};
}

DefenseSpec defense_spec_from_json(const json& j) {
  try {
    DefenseSpec spec;
    spec.kind = parse_defense_kind(j.at("kind").get<std::string>());
    spec.mix_ratio = j.at("mix_ratio").get<double>();
    spec.bits = j.at("bits").get<unsigned>();
    spec.retrain_on_squeezed = j.at("retrain_on_squeezed").get<bool>();
    validate(spec);
    return spec;
  } catch (const json::exception& e) {
    throw ValidationError("defense", e.what());
  }
}

std::vector<double> feature_squeeze(std::span<const double> x, unsigned bits) {
  if (bits < 1 || bits > 52) throw ValidationError("defense.bits", "must lie in [1, 52]");
  const double levels = std::ldexp(1.0, static_cast<int>(bits)) - 1.0;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::round(std::clamp(x[i], 0.0, 1.0) * levels) / levels;
  }
  return out;
}

Dataset squeeze_dataset(Dataset data, unsigned bits) {
  for (Eigen::Index i = 0; i < data.matrix.rows(); ++i) {
    const auto squeezed = feature_squeeze(data.row(static_cast<std::size_t>(i)), bits);
    data.matrix.row(i) = Eigen::Map<const Eigen::RowVectorXd>(squeezed.data(), data.matrix.cols());
  }
  return data;
}

SqueezedClassifier::SqueezedClassifier(const Classifier& inner, unsigned bits) : inner_(&inner), bits_(bits) {
  if (bits < 1 || bits > 52) throw ValidationError("defense.bits", "must lie in [1, 52]");
}

Vector SqueezedClassifier::scores(std::span<const double> x) const {
  check_dim(x);
  return inner_->scores(feature_squeeze(x, bits_));
}

Vector SqueezedClassifier::distribution(std::span<const double> x) const {
  check_dim(x);
  return inner_->distribution(feature_squeeze(x, bits_));
}

std::size_t adversarial_row_count(std::size_t n, double mix_ratio, std::size_t candidates) {
  if (!(mix_ratio >= 0.0 && mix_ratio < 1.0)) throw ValidationError("defense.mix_ratio", "must lie in [0, 1)");
  const auto wanted = static_cast<std::size_t>(std::llround(mix_ratio * static_cast<double>(n) / (1.0 - mix_ratio)));
  return std::min(wanted, candidates);
}

AdversarialTrainingResult adversarial_training(const Dataset& train, const AttackSpec& attack,
                                               const TrainConfig& model_cfg, const DefenseSpec& defense,
                                               std::uint64_t seed, std::size_t workers) {
  validate(defense);
  if (defense.kind != DefenseKind::kAdversarialTraining) {
    throw ValidationError("defense.kind", "adversarial_training needs kind adversarial-training");
  }
  require_executable(attack);
  validate(attack, train.dim(), train.num_classes());

  auto candidates = attack_candidates(train, attack);
  const std::size_t n_adv = adversarial_row_count(train.rows(), defense.mix_ratio, candidates.size());
  AdversarialTrainingResult result;
  if (n_adv == 0) {
    result.model = train_model(train, model_cfg);
    return result;
  }

  const Model reference = train_model(train, model_cfg);
  std::mt19937_64 rng(seed ^ kSelectionSalt);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  candidates.resize(n_adv);
  std::sort(candidates.begin(), candidates.end());

  std::optional<ClassProfile> profile;
  if (attack.kind == AttackKind::kMiL1) profile = build_profile(train, attack);
  const auto examples =
      craft_batch(as_classifier(reference), train, candidates, attack, profile ? &*profile : nullptr, workers);

  Dataset augmented = train;
  augmented.norm_params.reset();
  const auto n = static_cast<Eigen::Index>(train.rows());
  augmented.matrix.conservativeResize(n + static_cast<Eigen::Index>(n_adv), Eigen::NoChange);
  for (std::size_t k = 0; k < examples.size(); ++k) {
    const auto& ex = examples[k];
    augmented.matrix.row(n + static_cast<Eigen::Index>(k)) =
        Eigen::Map<const Eigen::RowVectorXd>(ex.perturbed.data(), augmented.matrix.cols());
    augmented.labels.push_back(ex.source_class);
    result.succeeded += ex.succeeded;
  }
  result.model = train_model(augmented, model_cfg);
  result.source_rows = std::move(candidates);
  return result;
}

}  // namespace netadv

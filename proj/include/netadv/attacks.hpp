#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "netadv/classifier.hpp"
#include "netadv/dataset.hpp"

namespace netadv {

// Attack taxonomy. Only white-box evasion attacks are executable; the other
// values exist so experiment descriptions can name them.
enum class AttackKind { kMiL1, kFgsm, kBim, kJsma };
enum class Knowledge { kWhiteBox, kBlackBoxQuery, kBlackBoxZeroQuery };
enum class Phase { kEvasion, kPoisoning };
enum class Specificity { kTargeted, kNonTargeted };

std::string to_string(AttackKind kind);
std::string to_string(Knowledge knowledge);
std::string to_string(Phase phase);
std::string to_string(Specificity specificity);

AttackKind parse_attack_kind(std::string_view s);
Knowledge parse_knowledge(std::string_view s);
Phase parse_phase(std::string_view s);
Specificity parse_specificity(std::string_view s);

struct AttackSpec {
  AttackKind kind = AttackKind::kMiL1;
  double epsilon = 1e-2;  // per-feature bound, normalized units
  // Perturbed-feature budget k. Unset means every feature (k = d).
  std::optional<std::size_t> max_features = 2;
  std::optional<std::size_t> target_class;
  // Class whose samples are attacked; unset attacks every eligible sample.
  std::optional<std::size_t> source_class;
  std::size_t iterations = 10;  // BIM steps, JSMA iteration cap
  double step_size = 2e-3;      // BIM alpha
  double theta = 1e-2;          // JSMA increment
  std::size_t mi_bins = 10;
  Knowledge knowledge = Knowledge::kWhiteBox;
  Phase phase = Phase::kEvasion;
  Specificity specificity = Specificity::kTargeted;

  std::size_t feature_budget(std::size_t dim) const { return max_features.value_or(dim); }
};

// Throws ValidationError (naming the attack.* field) when the spec is
// inconsistent for a feature space of width `dim` with `num_classes` classes
// (0 skips the class-index checks).
void validate(const AttackSpec& spec, std::size_t dim, std::size_t num_classes = 0);

// Throws UnsupportedAttackError unless the spec is white-box evasion.
void require_executable(const AttackSpec& spec);

nlohmann::json to_json(const AttackSpec& spec, const std::vector<std::string>& class_names);
AttackSpec attack_spec_from_json(const nlohmann::json& j, const std::vector<std::string>& class_names);

bool attack_succeeded(const AttackSpec& spec, std::size_t source_class, std::size_t predicted);

// ---------------------------------------------------------------------------
// Mutual-information feature ranking

// Plug-in mutual information (bits) between each feature, discretized into
// `bins` equal-width bins over [0, 1], and the class label. With a class pair
// only samples of those two classes take part.
std::vector<double> mutual_information_scores(
    const Dataset& train, std::optional<std::pair<std::size_t, std::size_t>> class_pair = std::nullopt,
    std::size_t bins = 10);

// Relabels to {rest, positive}: class 1 is `positive_class`, class 0 the rest.
Dataset one_vs_rest(const Dataset& data, std::size_t positive_class);

// Indices of the k largest scores, descending; ties go to the lower index.
std::vector<std::size_t> select_discriminant(std::span<const double> scores, std::size_t k);

struct ClassProfile {
  std::vector<std::size_t> feature_indices;  // descending discriminance
  std::vector<double> values;                // median of the target statistic
};

// Per-index median over the training samples of `target_class`.
ClassProfile class_profile(const Dataset& train, std::size_t target_class,
                           std::span<const std::size_t> indices);

// Per-index median over every training sample not in `excluded_class`.
ClassProfile complement_profile(const Dataset& train, std::size_t excluded_class,
                                std::span<const std::size_t> indices);

// Ranks features by MI and builds the profile the MI-L1 attack moves toward:
// targeted specs use the (source, target) pair and the target-class medians;
// non-targeted specs use source-vs-rest and the medians of all other classes.
ClassProfile build_profile(const Dataset& train, const AttackSpec& spec);

// ---------------------------------------------------------------------------
// Adversarial examples

struct AdversarialExample {
  std::size_t source_index = 0;
  std::vector<double> original;
  // Sparse perturbation, ascending index order, nonzero values only.
  std::vector<std::size_t> delta_indices;
  std::vector<double> delta_values;
  std::vector<double> perturbed;
  std::size_t source_class = 0;
  std::size_t predicted_before = 0;
  std::size_t predicted_after = 0;
  bool succeeded = false;

  double max_abs_delta() const;
};

// Checks the budget, sparsity, domain and untouched-coordinate invariants.
// `allowed` restricts the support (empty = any index). Returns a description
// of the first violation, or nullopt.
std::optional<std::string> check_invariants(const AdversarialExample& example, const AttackSpec& spec,
                                            std::span<const std::size_t> allowed = {});

// Greedy constrained-L1 move toward the profile: for each profile index in
// order, delta_i = clamp(profile_i - x_i, -eps, +eps); the model is queried
// after each feature and the walk stops at the first success or after k
// features.
AdversarialExample craft_mi_l1(std::span<const double> x, std::size_t source_class,
                               const ClassProfile& profile, const AttackSpec& spec,
                               const Classifier& model, std::size_t source_index = 0);

// Gradient attacks require an MlpModel; any other classifier raises
// UnsupportedAttackError. With k < d only the k coordinates with the largest
// |gradient| at x are perturbed.
AdversarialExample fgsm(const Classifier& model, std::span<const double> x, std::size_t true_class,
                        const AttackSpec& spec, std::size_t source_index = 0);

AdversarialExample bim(const Classifier& model, std::span<const double> x, std::size_t true_class,
                       const AttackSpec& spec, std::size_t source_index = 0);

// Increases the most salient feature by theta per iteration (bounded by eps
// and the [0, 1] domain) until the target class is predicted or k distinct
// features have been touched.
AdversarialExample jsma(const Classifier& model, std::span<const double> x, std::size_t true_class,
                        const AttackSpec& spec, std::size_t source_index = 0);

// Samples of `data` the spec attacks: rows of the source class when one is
// set, otherwise every row not already labelled with the target class.
std::vector<std::size_t> attack_candidates(const Dataset& data, const AttackSpec& spec);

// Crafts one example per index, in parallel; output order follows `indices`.
// `profile` is required for MI-L1.
std::vector<AdversarialExample> craft_batch(const Classifier& model, const Dataset& data,
                                            std::span<const std::size_t> indices, const AttackSpec& spec,
                                            const ClassProfile* profile, std::size_t workers = 1);

struct TransferResult {
  std::size_t attempted = 0;
  std::size_t fooled = 0;             // other model meets the success criterion
  std::size_t fooled_given_success = 0;  // ... among examples that fooled the source model
  std::size_t succeeded_on_source = 0;
};

TransferResult transfer(const std::vector<AdversarialExample>& examples, const Classifier& other,
                        const AttackSpec& spec);

// CSV: source_index, source_class, predicted_before, predicted_after,
// succeeded, support, delta, then the perturbed feature vector.
void write_examples_csv(std::ostream& out, const std::vector<AdversarialExample>& examples,
                        const Dataset& source);

// Restores examples; originals are taken from `source` by row index.
std::vector<AdversarialExample> read_examples_csv(std::istream& in, const Dataset& source);

}  // namespace netadv

#include <algorithm>
#include <cmath>
#include <numeric>

#include "netadv/attacks.hpp"
#include "netadv/error.hpp"
#include "netadv/stats.hpp"

namespace netadv {
namespace {

std::size_t bin_of(double v, std::size_t bins) {
  const double scaled = std::clamp(v, 0.0, 1.0) * static_cast<double>(bins);
  return std::min(bins - 1, static_cast<std::size_t>(scaled));
}

ClassProfile profile_over(const Dataset& train, std::span<const std::size_t> indices, auto&& member) {
  ClassProfile profile;
  profile.feature_indices.assign(indices.begin(), indices.end());
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < train.rows(); ++i) {
    if (member(train.labels[i])) rows.push_back(i);
  }
  if (rows.empty()) throw ValidationError("profile", "no training samples for the profile class");
  std::vector<double> column(rows.size());
  for (std::size_t f : indices) {
    if (f >= train.dim()) throw ValidationError("profile", "feature index out of range");
    for (std::size_t r = 0; r < rows.size(); ++r) {
      column[r] = train.matrix(static_cast<Eigen::Index>(rows[r]), static_cast<Eigen::Index>(f));
    }
    profile.values.push_back(median(column));
  }
  return profile;
}

}  // namespace

std::vector<double> mutual_information_scores(const Dataset& train,
                                              std::optional<std::pair<std::size_t, std::size_t>> class_pair,
                                              std::size_t bins) {
  if (train.rows() == 0) throw ValidationError("train", "training set is empty");
  if (bins == 0) throw ValidationError("attack.mi_bins", "must be positive");
  const std::size_t classes = train.num_classes();
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < train.rows(); ++i) {
    const std::size_t y = train.labels[i];
    if (!class_pair || y == class_pair->first || y == class_pair->second) rows.push_back(i);
  }
  std::vector<double> scores(train.dim(), 0.0);
  if (rows.empty()) return scores;

  const double n = static_cast<double>(rows.size());
  std::vector<std::size_t> class_count(classes, 0);
  for (std::size_t r : rows) ++class_count[train.labels[r]];

  std::vector<std::size_t> joint(bins * classes);
  std::vector<std::size_t> bin_count(bins);
  for (std::size_t f = 0; f < train.dim(); ++f) {
    std::fill(joint.begin(), joint.end(), 0);
    std::fill(bin_count.begin(), bin_count.end(), 0);
    for (std::size_t r : rows) {
      const std::size_t b = bin_of(train.matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f)), bins);
      ++joint[b * classes + train.labels[r]];
      ++bin_count[b];
    }
    double mi = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
      for (std::size_t c = 0; c < classes; ++c) {
        const std::size_t count = joint[b * classes + c];
        if (count == 0) continue;
        const double p_joint = static_cast<double>(count) / n;
        mi += p_joint * std::log2(static_cast<double>(count) * n /
                                  (static_cast<double>(bin_count[b]) * static_cast<double>(class_count[c])));
      }
    }
    scores[f] = std::max(0.0, mi);
  }
  return scores;
}

Dataset one_vs_rest(const Dataset& data, std::size_t positive_class) {
  if (positive_class >= data.num_classes()) throw ValidationError("class", "class index out of range");
  Dataset out = data;
  for (auto& y : out.labels) y = y == positive_class ? 1 : 0;
  out.class_names = {"rest", data.class_names[positive_class]};
  return out;
}

std::vector<std::size_t> select_discriminant(std::span<const double> scores, std::size_t k) {
  if (k > scores.size()) throw ValidationError("attack.max_features", "k exceeds the feature count");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(k);
  return order;
}

ClassProfile class_profile(const Dataset& train, std::size_t target_class,
                           std::span<const std::size_t> indices) {
  return profile_over(train, indices, [&](std::size_t y) { return y == target_class; });
}

ClassProfile complement_profile(const Dataset& train, std::size_t excluded_class,
                                std::span<const std::size_t> indices) {
  return profile_over(train, indices, [&](std::size_t y) { return y != excluded_class; });
}

ClassProfile build_profile(const Dataset& train, const AttackSpec& spec) {
  validate(spec, train.dim(), train.num_classes());
  const std::size_t k = spec.feature_budget(train.dim());
  if (spec.specificity == Specificity::kTargeted) {
    const std::size_t target = *spec.target_class;
    std::optional<std::pair<std::size_t, std::size_t>> pair;
    if (spec.source_class) pair = std::pair{*spec.source_class, target};
    const Dataset ranked = spec.source_class ? train : one_vs_rest(train, target);
    const auto scores = mutual_information_scores(ranked, spec.source_class ? pair : std::nullopt, spec.mi_bins);
    return class_profile(train, target, select_discriminant(scores, k));
  }
  if (!spec.source_class) {
    throw ValidationError("attack.source", "non-targeted MI-L1 needs the source class to move away from");
  }
  const auto scores = mutual_information_scores(one_vs_rest(train, *spec.source_class), std::nullopt, spec.mi_bins);
  return complement_profile(train, *spec.source_class, select_discriminant(scores, k));
}

}  // namespace netadv

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "netadv/attacks.hpp"
#include "netadv/dataset.hpp"

namespace netadv {

struct ClassMetrics {
  std::size_t support = 0;  // true samples of the class
  std::size_t predicted = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Set when the corresponding denominator was zero and the value defaulted to 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

struct ClassificationReport {
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::vector<ClassMetrics> per_class;
  std::size_t total = 0;
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;

  bool operator==(const ClassificationReport&) const = default;
};

// Throws ValidationError on a length mismatch or a class index >= num_classes.
ClassificationReport classification_report(std::span<const std::size_t> predictions,
                                           std::span<const std::size_t> labels, std::size_t num_classes);

// Jensen-Shannon divergence in bits. Both inputs must be probability vectors
// of equal length.
double js_divergence(std::span<const double> p, std::span<const double> q);

struct StabilityResult {
  double mean = 0.0;  // bits
  std::vector<double> per_sample;
  // Mean per true class; nullopt for classes without samples.
  std::vector<std::optional<double>> per_class;
};

// Row i of `before` and `after` hold the output distributions for the same
// sample. `labels`/`num_classes` are only used for the per-class breakdown.
StabilityResult inference_stability(const Matrix& before, const Matrix& after,
                                    std::span<const std::size_t> labels = {}, std::size_t num_classes = 0);

struct AccuracyVariance {
  double mean_before = 0.0;
  double mean_after = 0.0;
  double difference = 0.0;  // mean_after - mean_before
  double variance_before = 0.0;
  double variance_after = 0.0;
};

// Unbiased sample variances; singletons have variance 0.
AccuracyVariance accuracy_variance(std::span<const double> before, std::span<const double> after);

// Fraction of examples predicted outside their source class after the attack.
double misclassification_ratio(std::span<const AdversarialExample> examples);

// Fraction of examples still predicted as their source class, before or after
// the perturbation.
double attempted_recall(std::span<const AdversarialExample> examples, bool after);

}  // namespace netadv

#include <algorithm>
#include <cmath>
#include <numeric>

#include "netadv/error.hpp"
#include "netadv/metrics.hpp"

namespace netadv {
namespace {

void check_distribution(std::span<const double> p, const char* field) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(field, "probabilities must be finite and nonnegative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw ValidationError(field, "probabilities must sum to 1");
}

double kl_to_mixture(std::span<const double> p, std::span<const double> q) {
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    kl += p[i] * std::log2(p[i] / (0.5 * (p[i] + q[i])));
  }
  return kl;
}

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

ClassificationReport classification_report(std::span<const std::size_t> predictions,
                                           std::span<const std::size_t> labels, std::size_t num_classes) {
  if (predictions.size() != labels.size()) {
    throw ValidationError("predictions", "length " + std::to_string(predictions.size()) +
                                             " does not match " + std::to_string(labels.size()) + " labels");
  }
  ClassificationReport r;
  r.confusion.assign(num_classes, std::vector<std::size_t>(num_classes, 0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= num_classes || predictions[i] >= num_classes) {
      throw ValidationError("labels", "class index out of range at position " + std::to_string(i));
    }
    ++r.confusion[labels[i]][predictions[i]];
  }
  r.total = labels.size();
  r.per_class.resize(num_classes);
  std::size_t correct = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto& m = r.per_class[c];
    const std::size_t tp = r.confusion[c][c];
    correct += tp;
    for (std::size_t k = 0; k < num_classes; ++k) {
      m.support += r.confusion[c][k];
      m.predicted += r.confusion[k][c];
    }
    m.precision_undefined = m.predicted == 0;
    m.recall_undefined = m.support == 0;
    if (!m.precision_undefined) m.precision = static_cast<double>(tp) / static_cast<double>(m.predicted);
    if (!m.recall_undefined) m.recall = static_cast<double>(tp) / static_cast<double>(m.support);
    m.f1_undefined = m.precision + m.recall == 0.0;
    if (!m.f1_undefined) m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    r.macro_precision += m.precision;
    r.macro_recall += m.recall;
    r.macro_f1 += m.f1;
  }
  if (num_classes > 0) {
    r.macro_precision /= static_cast<double>(num_classes);
    r.macro_recall /= static_cast<double>(num_classes);
    r.macro_f1 /= static_cast<double>(num_classes);
  }
  if (r.total > 0) r.accuracy = static_cast<double>(correct) / static_cast<double>(r.total);
  return r;
}

double js_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw DimensionError(p.size(), q.size());
  check_distribution(p, "outputs_before");
  check_distribution(q, "outputs_after");
  return std::clamp(0.5 * kl_to_mixture(p, q) + 0.5 * kl_to_mixture(q, p), 0.0, 1.0);
}

StabilityResult inference_stability(const Matrix& before, const Matrix& after, std::span<const std::size_t> labels,
                                    std::size_t num_classes) {
  if (before.rows() != after.rows()) {
    throw ValidationError("outputs_after", "expected " + std::to_string(before.rows()) + " paired outputs, got " +
                                               std::to_string(after.rows()));
  }
  if (before.cols() != after.cols()) {
    throw DimensionError(static_cast<std::size_t>(before.cols()), static_cast<std::size_t>(after.cols()));
  }
  if (!labels.empty() && labels.size() != static_cast<std::size_t>(before.rows())) {
    throw ValidationError("labels", "length does not match the outputs");
  }
  StabilityResult out;
  const auto n = static_cast<std::size_t>(before.rows());
  const auto width = static_cast<std::size_t>(before.cols());
  out.per_sample.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out.per_sample[i] = js_divergence({before.row(r).data(), width}, {after.row(r).data(), width});
  }
  if (n > 0) out.mean = mean(out.per_sample);

  if (!labels.empty()) {
    std::vector<double> sums(num_classes, 0.0);
    std::vector<std::size_t> counts(num_classes, 0);
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] >= num_classes) throw ValidationError("labels", "class index out of range");
      sums[labels[i]] += out.per_sample[i];
      ++counts[labels[i]];
    }
    out.per_class.resize(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
      if (counts[c] > 0) out.per_class[c] = sums[c] / static_cast<double>(counts[c]);
    }
  }
  return out;
}

AccuracyVariance accuracy_variance(std::span<const double> before, std::span<const double> after) {
  if (before.empty() || after.empty()) throw ValidationError("accuracy_runs", "each phase needs at least one run");
  AccuracyVariance out;
  out.mean_before = mean(before);
  out.mean_after = mean(after);
  out.difference = out.mean_after - out.mean_before;
  out.variance_before = sample_variance(before);
  out.variance_after = sample_variance(after);
  return out;
}

double misclassification_ratio(std::span<const AdversarialExample> examples) {
  if (examples.empty()) throw ValidationError("examples", "no adversarial examples to score");
  const auto evaded = std::count_if(examples.begin(), examples.end(),
                                    [](const AdversarialExample& ex) { return ex.predicted_after != ex.source_class; });
  return static_cast<double>(evaded) / static_cast<double>(examples.size());
}

double attempted_recall(std::span<const AdversarialExample> examples, bool after) {
  if (examples.empty()) throw ValidationError("examples", "no adversarial examples to score");
  const auto kept = std::count_if(examples.begin(), examples.end(), [after](const AdversarialExample& ex) {
    return (after ? ex.predicted_after : ex.predicted_before) == ex.source_class;
  });
  return static_cast<double>(kept) / static_cast<double>(examples.size());
}

}  // namespace netadv

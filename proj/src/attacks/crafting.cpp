#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "netadv/attacks.hpp"
#include "netadv/error.hpp"
#include "netadv/mlp.hpp"
#include "netadv/parallel.hpp"

namespace netadv {
namespace {

const MlpModel& require_gradients(const Classifier& model, AttackKind kind) {
  const auto* mlp = dynamic_cast<const MlpModel*>(&model);
  if (!mlp) {
    throw UnsupportedAttackError(to_string(kind) + " needs input gradients; the model does not provide them");
  }
  return *mlp;
}

// Finalizes an example from a dense delta: x* = clamp(x + delta, 0, 1).
AdversarialExample assemble(std::span<const double> x, const std::vector<double>& delta,
                            std::size_t source_index, std::size_t source_class, std::size_t predicted_before,
                            const Classifier& model, const AttackSpec& spec) {
  AdversarialExample ex;
  ex.source_index = source_index;
  ex.original.assign(x.begin(), x.end());
  ex.perturbed = ex.original;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    if (delta[i] == 0.0) continue;
    ex.delta_indices.push_back(i);
    ex.delta_values.push_back(delta[i]);
    ex.perturbed[i] = std::clamp(x[i] + delta[i], 0.0, 1.0);
  }
  ex.source_class = source_class;
  ex.predicted_before = predicted_before;
  ex.predicted_after = ex.delta_indices.empty() ? predicted_before : model.predict(ex.perturbed);
  ex.succeeded = attack_succeeded(spec, source_class, ex.predicted_after);
  return ex;
}

std::vector<double> current_point(std::span<const double> x, const std::vector<double>& delta) {
  std::vector<double> point(x.begin(), x.end());
  for (std::size_t i = 0; i < point.size(); ++i) {
    if (delta[i] != 0.0) point[i] = std::clamp(x[i] + delta[i], 0.0, 1.0);
  }
  return point;
}

// The k coordinates with the largest |g| (ties to the lower index), restricted
// to nonzero gradients; everything when k >= d.
std::vector<bool> gradient_support(const Vector& g, std::size_t k) {
  const auto d = static_cast<std::size_t>(g.size());
  std::vector<bool> allowed(d, k >= d);
  if (k >= d) return allowed;
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(g(static_cast<Eigen::Index>(a))) > std::abs(g(static_cast<Eigen::Index>(b)));
  });
  for (std::size_t r = 0; r < k; ++r) {
    if (g(static_cast<Eigen::Index>(order[r])) != 0.0) allowed[order[r]] = true;
  }
  return allowed;
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Class whose loss the gradient step works on, and the step direction.
std::pair<std::size_t, double> loss_target(const AttackSpec& spec, std::size_t true_class) {
  if (spec.specificity == Specificity::kTargeted) return {*spec.target_class, -1.0};
  return {true_class, 1.0};
}

void check_input(const Classifier& model, std::span<const double> x, const AttackSpec& spec) {
  require_executable(spec);
  // Configs need epsilon > 0; a direct call with a zero budget is the identity.
  AttackSpec probe = spec;
  if (probe.epsilon == 0.0 && spec.kind != AttackKind::kBim) probe.epsilon = 1.0;
  validate(probe, model.input_dim(), model.num_classes());
  if (x.size() != model.input_dim()) throw DimensionError(model.input_dim(), x.size());
}

}  // namespace

double AdversarialExample::max_abs_delta() const {
  double m = 0.0;
  for (double v : delta_values) m = std::max(m, std::abs(v));
  return m;
}

std::optional<std::string> check_invariants(const AdversarialExample& ex, const AttackSpec& spec,
                                            std::span<const std::size_t> allowed) {
  const std::size_t d = ex.original.size();
  if (ex.perturbed.size() != d) return "perturbed vector has the wrong width";
  if (ex.delta_indices.size() != ex.delta_values.size()) return "delta indices and values differ in length";
  if (ex.max_abs_delta() > spec.epsilon) return "max-norm of delta exceeds epsilon";
  if (ex.delta_indices.size() > spec.feature_budget(d)) return "more perturbed features than the budget k";
  std::vector<bool> in_support(d, false);
  for (std::size_t k = 0; k < ex.delta_indices.size(); ++k) {
    const std::size_t i = ex.delta_indices[k];
    if (i >= d) return "delta index out of range";
    if (k > 0 && i <= ex.delta_indices[k - 1]) return "delta indices not strictly ascending";
    if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), i) == allowed.end()) {
      return "delta touches a feature outside the selected set";
    }
    in_support[i] = true;
  }
  for (std::size_t i = 0; i < d; ++i) {
    if (!(ex.perturbed[i] >= 0.0 && ex.perturbed[i] <= 1.0)) return "perturbed value outside [0, 1]";
    if (!in_support[i] && ex.perturbed[i] != ex.original[i]) return "coordinate outside the support changed";
  }
  return std::nullopt;
}

AdversarialExample craft_mi_l1(std::span<const double> x, std::size_t source_class, const ClassProfile& profile,
                               const AttackSpec& spec, const Classifier& model, std::size_t source_index) {
  check_input(model, x, spec);
  if (profile.feature_indices.size() != profile.values.size()) {
    throw ValidationError("profile", "indices and values differ in length");
  }
  std::vector<double> delta(x.size(), 0.0);
  const std::size_t before = model.predict(x);
  std::size_t predicted = before;
  const std::size_t walk = std::min(spec.feature_budget(x.size()), profile.feature_indices.size());
  for (std::size_t step = 0; step < walk && !attack_succeeded(spec, source_class, predicted); ++step) {
    const std::size_t i = profile.feature_indices[step];
    if (i >= x.size()) throw ValidationError("profile", "feature index out of range");
    delta[i] = std::clamp(profile.values[step] - x[i], -spec.epsilon, spec.epsilon);
    if (delta[i] != 0.0) predicted = model.predict(current_point(x, delta));
  }
  return assemble(x, delta, source_index, source_class, before, model, spec);
}

AdversarialExample fgsm(const Classifier& model, std::span<const double> x, std::size_t true_class,
                        const AttackSpec& spec, std::size_t source_index) {
  const MlpModel& mlp = require_gradients(model, AttackKind::kFgsm);
  check_input(model, x, spec);
  const auto [target, direction] = loss_target(spec, true_class);
  const Vector g = mlp.input_gradient(x, target);
  const auto allowed = gradient_support(g, spec.feature_budget(x.size()));
  std::vector<double> delta(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!allowed[i]) continue;
    delta[i] = std::clamp(spec.epsilon * direction * sign(g(static_cast<Eigen::Index>(i))), -x[i], 1.0 - x[i]);
  }
  return assemble(x, delta, source_index, true_class, model.predict(x), model, spec);
}

AdversarialExample bim(const Classifier& model, std::span<const double> x, std::size_t true_class,
                       const AttackSpec& spec, std::size_t source_index) {
  const MlpModel& mlp = require_gradients(model, AttackKind::kBim);
  check_input(model, x, spec);
  if (spec.iterations == 0) throw ValidationError("attack.iterations", "must be at least 1");
  if (!(spec.step_size > 0.0) || spec.step_size > spec.epsilon) {
    throw ValidationError("attack.step_size", "must lie in (0, epsilon]");
  }
  const auto [target, direction] = loss_target(spec, true_class);
  std::vector<double> delta(x.size(), 0.0);
  std::vector<bool> allowed;
  for (std::size_t it = 0; it < spec.iterations; ++it) {
    const Vector g = mlp.input_gradient(current_point(x, delta), target);
    if (it == 0) allowed = gradient_support(g, spec.feature_budget(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!allowed[i]) continue;
      const double stepped = std::clamp(delta[i] + spec.step_size * direction * sign(g(static_cast<Eigen::Index>(i))),
                                        -spec.epsilon, spec.epsilon);
      delta[i] = std::clamp(stepped, -x[i], 1.0 - x[i]);
    }
  }
  return assemble(x, delta, source_index, true_class, model.predict(x), model, spec);
}

AdversarialExample jsma(const Classifier& model, std::span<const double> x, std::size_t true_class,
                        const AttackSpec& spec, std::size_t source_index) {
  const MlpModel& mlp = require_gradients(model, AttackKind::kJsma);
  check_input(model, x, spec);
  if (spec.specificity != Specificity::kTargeted) {
    throw ValidationError("attack.specificity", "JSMA is a targeted attack");
  }
  const std::size_t target = *spec.target_class;
  const std::size_t budget = spec.feature_budget(x.size());
  std::vector<double> delta(x.size(), 0.0);
  std::set<std::size_t> touched;
  const std::size_t before = model.predict(x);
  std::size_t predicted = before;
  for (std::size_t it = 0; it < spec.iterations && predicted != target && touched.size() < budget; ++it) {
    const auto point = current_point(x, delta);
    const Eigen::MatrixXd jac = mlp.probability_jacobian(point);
    std::size_t best = x.size();
    double best_saliency = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      // Only features that can still increase within the budget and domain.
      if (delta[i] >= spec.epsilon || point[i] >= 1.0) continue;
      const auto col = static_cast<Eigen::Index>(i);
      const double toward = jac(static_cast<Eigen::Index>(target), col);
      const double others = jac.col(col).sum() - toward;
      if (toward < 0.0 || others > 0.0) continue;
      const double saliency = toward * std::abs(others);
      if (saliency > best_saliency) {
        best_saliency = saliency;
        best = i;
      }
    }
    if (best == x.size()) break;
    delta[best] = std::min({delta[best] + spec.theta, spec.epsilon, 1.0 - x[best]});
    touched.insert(best);
    predicted = model.predict(current_point(x, delta));
  }
  return assemble(x, delta, source_index, true_class, before, model, spec);
}

std::vector<std::size_t> attack_candidates(const Dataset& data, const AttackSpec& spec) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const std::size_t y = data.labels[i];
    if (spec.source_class) {
      if (y == *spec.source_class) out.push_back(i);
    } else if (!spec.target_class || y != *spec.target_class) {
      out.push_back(i);
    }
  }
  return out;
}

std::vector<AdversarialExample> craft_batch(const Classifier& model, const Dataset& data,
                                            std::span<const std::size_t> indices, const AttackSpec& spec,
                                            const ClassProfile* profile, std::size_t workers) {
  require_executable(spec);
  validate(spec, data.dim(), data.num_classes());
  if (spec.kind == AttackKind::kMiL1 && !profile) {
    throw ValidationError("attack", "MI-L1 needs a class profile");
  }
  if (spec.kind != AttackKind::kMiL1) require_gradients(model, spec.kind);
  std::vector<AdversarialExample> out(indices.size());
  parallel_for(indices.size(), workers, [&](std::size_t k) {
    const std::size_t row = indices[k];
    const auto x = data.row(row);
    const std::size_t y = data.labels.at(row);
    switch (spec.kind) {
      case AttackKind::kMiL1: out[k] = craft_mi_l1(x, y, *profile, spec, model, row); break;
      case AttackKind::kFgsm: out[k] = fgsm(model, x, y, spec, row); break;
      case AttackKind::kBim: out[k] = bim(model, x, y, spec, row); break;
      case AttackKind::kJsma: out[k] = jsma(model, x, y, spec, row); break;
    }
  });
  return out;
}

TransferResult transfer(const std::vector<AdversarialExample>& examples, const Classifier& other,
                        const AttackSpec& spec) {
  TransferResult result;
  for (const auto& ex : examples) {
    ++result.attempted;
    const bool fooled = attack_succeeded(spec, ex.source_class, other.predict(ex.perturbed));
    result.fooled += fooled;
    if (ex.succeeded) {
      ++result.succeeded_on_source;
      result.fooled_given_success += fooled;
    }
  }
  return result;
}

}  // namespace netadv

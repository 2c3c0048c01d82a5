#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <list>
#include <unordered_map>

#include "netadv/error.hpp"
#include "netadv/svm.hpp"

namespace netadv {
namespace {

constexpr double kTau = 1e-12;

// LRU cache of kernel matrix columns, bounded by a byte budget.
class KernelColumnCache {
 public:
  KernelColumnCache(const Matrix& x, double gamma, std::size_t cache_bytes)
      : x_(x), gamma_(gamma), sq_norms_(x.rowwise().squaredNorm()) {
    const std::size_t column_bytes = std::max<std::size_t>(1, static_cast<std::size_t>(x.rows())) * sizeof(double);
    capacity_ = std::max<std::size_t>(2, cache_bytes / column_bytes);
  }

  const Eigen::VectorXd& column(std::size_t i) {
    if (auto it = index_.find(i); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
    if (lru_.size() >= capacity_) {
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
    const auto row = static_cast<Eigen::Index>(i);
    Eigen::VectorXd col = x_ * x_.row(row).transpose();
    col = (-gamma_ * ((sq_norms_.array() + sq_norms_(row)) - 2.0 * col.array()).max(0.0)).exp();
    lru_.emplace_front(i, std::move(col));
    index_.emplace(i, lru_.begin());
    return lru_.front().second;
  }

 private:
  const Matrix& x_;
  double gamma_;
  Eigen::VectorXd sq_norms_;
  std::size_t capacity_ = 2;
  std::list<std::pair<std::size_t, Eigen::VectorXd>> lru_;
  std::unordered_map<std::size_t, std::list<std::pair<std::size_t, Eigen::VectorXd>>::iterator> index_;
};

}  // namespace

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma) {
  if (a.size() != b.size()) throw DimensionError(a.size(), b.size());
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sq += diff * diff;
  }
  return std::exp(-gamma * sq);
}

// Dual: min 1/2 a^T Q a - e^T a, 0 <= a <= C, y^T a = 0, Q_ij = y_i y_j K_ij.
// Working-set selection and the two-variable update follow the second-order
// scheme of Fan, Chen and Lin (JMLR 2005).
BinarySolution solve_binary_smo(const Matrix& x, std::span<const int> y, double c, double gamma,
                                double tolerance, std::size_t cache_bytes,
                                std::size_t max_iterations) {
  const std::size_t n = static_cast<std::size_t>(x.rows());
  if (y.size() != n) throw DimensionError(n, y.size());
  if (n == 0) throw ValidationError("train", "empty training set");
  if (!(c > 0.0)) throw ValidationError("model.C", "must be positive");
  if (!(gamma > 0.0)) throw ValidationError("model.gamma", "must be positive");
  if (!(tolerance > 0.0)) throw ValidationError("model.tolerance", "must be positive");
  if (max_iterations == 0) max_iterations = std::max<std::size_t>(10'000'000, 100 * n);

  KernelColumnCache cache(x, gamma, cache_bytes);
  BinarySolution sol;
  sol.alpha.assign(n, 0.0);
  std::vector<double> grad(n, -1.0);
  auto& alpha = sol.alpha;
  const auto yd = [&](std::size_t t) { return static_cast<double>(y[t]); };
  const auto at_upper = [&](std::size_t t) { return alpha[t] >= c; };
  const auto at_lower = [&](std::size_t t) { return alpha[t] <= 0.0; };
  // RBF: K_tt = 1, so Q_tt = 1 for every t.
  constexpr double q_diag = 1.0;

  while (true) {
    double g_max = -std::numeric_limits<double>::infinity();
    double g_max2 = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] == 1) {
        if (!at_upper(t) && -grad[t] >= g_max) {
          g_max = -grad[t];
          i = t;
        }
      } else if (!at_lower(t) && grad[t] >= g_max) {
        g_max = grad[t];
        i = t;
      }
    }
    std::size_t j = n;
    double best_obj = std::numeric_limits<double>::infinity();
    const Eigen::VectorXd* k_i = i < n ? &cache.column(i) : nullptr;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] == 1) {
        if (at_lower(t)) continue;
        const double grad_diff = g_max + grad[t];
        g_max2 = std::max(g_max2, grad[t]);
        if (grad_diff > 0.0 && k_i) {
          const double kit = (*k_i)(static_cast<Eigen::Index>(t));
          double quad = q_diag + q_diag - 2.0 * yd(i) * kit;
          if (quad <= 0.0) quad = kTau;
          const double obj = -(grad_diff * grad_diff) / quad;
          if (obj <= best_obj) {
            best_obj = obj;
            j = t;
          }
        }
      } else {
        if (at_upper(t)) continue;
        const double grad_diff = g_max - grad[t];
        g_max2 = std::max(g_max2, -grad[t]);
        if (grad_diff > 0.0 && k_i) {
          const double kit = (*k_i)(static_cast<Eigen::Index>(t));
          double quad = q_diag + q_diag + 2.0 * yd(i) * kit;
          if (quad <= 0.0) quad = kTau;
          const double obj = -(grad_diff * grad_diff) / quad;
          if (obj <= best_obj) {
            best_obj = obj;
            j = t;
          }
        }
      }
    }
    sol.kkt_gap = std::max(0.0, g_max + g_max2);
    if (i == n || j == n || g_max + g_max2 < tolerance) {
      sol.converged = true;
      break;
    }
    if (sol.iterations >= max_iterations) break;
    ++sol.iterations;

    // Copies: fetching column j may evict column i from the cache.
    const Eigen::VectorXd col_i = cache.column(i);
    const Eigen::VectorXd col_j = cache.column(j);
    const double q_ij = yd(i) * yd(j) * col_i(static_cast<Eigen::Index>(j));
    const double old_i = alpha[i];
    const double old_j = alpha[j];

    if (y[i] != y[j]) {
      double quad = q_diag + q_diag + 2.0 * q_ij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = q_diag + q_diag - 2.0 * q_ij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }

    const double d_i = alpha[i] - old_i;
    const double d_j = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) {
      const auto k = static_cast<Eigen::Index>(t);
      grad[t] += yd(t) * (yd(i) * col_i(k) * d_i + yd(j) * col_j(k) * d_j);
    }
  }

  // Bias from free variables; falls back to the midpoint of the feasible range.
  double upper = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = yd(t) * grad[t];
    if (at_upper(t)) {
      if (y[t] == -1) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else if (at_lower(t)) {
      if (y[t] == 1) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  double rho = 0.0;
  if (free_count > 0) {
    rho = free_sum / static_cast<double>(free_count);
  } else if (std::isfinite(upper) && std::isfinite(lower)) {
    rho = (upper + lower) / 2.0;
  } else if (std::isfinite(upper)) {
    rho = upper;
  } else if (std::isfinite(lower)) {
    rho = lower;
  }
  sol.bias = -rho;
  return sol;
}

SvmModel::SvmModel(double gamma, double c, Matrix support_vectors, Eigen::MatrixXd coefficients,
                   Eigen::VectorXd bias, std::vector<MachineInfo> machines)
    : gamma_(gamma),
      c_(c),
      support_vectors_(std::move(support_vectors)),
      coefficients_(std::move(coefficients)),
      bias_(std::move(bias)),
      machines_(std::move(machines)) {
  if (coefficients_.rows() != bias_.size() || coefficients_.cols() != support_vectors_.rows()) {
    throw ValidationError("svm", "coefficient matrix does not match support vectors and classes");
  }
  if (machines_.size() != static_cast<std::size_t>(bias_.size())) {
    throw ValidationError("svm", "one machine record per class required");
  }
  sv_sq_norms_ = support_vectors_.rowwise().squaredNorm();
}

Vector SvmModel::scores(std::span<const double> x) const {
  check_dim(x);
  const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
  Eigen::VectorXd k = support_vectors_ * v;
  k = (-gamma_ * ((sv_sq_norms_.array() + v.squaredNorm()) - 2.0 * k.array()).max(0.0)).exp();
  return coefficients_ * k + bias_;
}

SvmModel train_svm_rbf(const Dataset& train, const SvmConfig& cfg) {
  const std::size_t classes = train.num_classes();
  if (classes < 2) throw ValidationError("train", "need at least two classes");
  const auto counts = train.class_counts();
  for (std::size_t c = 0; c < classes; ++c) {
    if (counts[c] == 0) {
      throw ValidationError("train", "class '" + train.class_names[c] + "' has no training samples");
    }
  }
  const double gamma = cfg.gamma.value_or(1.0 / static_cast<double>(std::max<std::size_t>(1, train.dim())));
  const std::size_t n = train.rows();
  const std::size_t cache_bytes = cfg.cache_mb * 1024 * 1024;

  // With two classes the machines are mirror images; solve once and negate.
  const std::size_t solved = classes == 2 ? 1 : classes;
  std::vector<BinarySolution> solutions;
  std::vector<int> y(n);
  for (std::size_t m = 0; m < solved; ++m) {
    const std::size_t positive = classes == 2 ? 1 : m;
    for (std::size_t i = 0; i < n; ++i) y[i] = train.labels[i] == positive ? 1 : -1;
    solutions.push_back(solve_binary_smo(train.matrix, y, cfg.c, gamma, cfg.tolerance, cache_bytes,
                                         cfg.max_iterations));
    if (!solutions.back().converged) {
      std::cerr << "warning: SMO for class '" << train.class_names[positive]
                << "' stopped at the iteration limit, KKT gap " << solutions.back().kkt_gap << "\n";
    }
  }

  std::vector<std::size_t> pooled;
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& s : solutions) {
      if (s.alpha[i] > 0.0) {
        pooled.push_back(i);
        break;
      }
    }
  }
  Matrix sv(static_cast<Eigen::Index>(pooled.size()), train.matrix.cols());
  Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(classes),
                                               static_cast<Eigen::Index>(pooled.size()));
  Eigen::VectorXd bias(static_cast<Eigen::Index>(classes));
  std::vector<MachineInfo> machines(classes);

  for (std::size_t m = 0; m < solved; ++m) {
    const std::size_t positive = classes == 2 ? 1 : m;
    const auto& s = solutions[m];
    MachineInfo info{0, s.iterations, s.kkt_gap, s.converged};
    for (std::size_t k = 0; k < pooled.size(); ++k) {
      const std::size_t i = pooled[k];
      const double sign = train.labels[i] == positive ? 1.0 : -1.0;
      coef(static_cast<Eigen::Index>(positive), static_cast<Eigen::Index>(k)) = sign * s.alpha[i];
      info.support_count += s.alpha[i] > 0.0;
    }
    bias(static_cast<Eigen::Index>(positive)) = s.bias;
    machines[positive] = info;
  }
  if (classes == 2) {
    coef.row(0) = -coef.row(1);
    bias(0) = -bias(1);
    machines[0] = machines[1];
  }
  for (std::size_t k = 0; k < pooled.size(); ++k) {
    sv.row(static_cast<Eigen::Index>(k)) = train.matrix.row(static_cast<Eigen::Index>(pooled[k]));
  }
  return SvmModel(gamma, cfg.c, std::move(sv), std::move(coef), std::move(bias), std::move(machines));
}

}  // namespace netadv

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "netadv/classifier.hpp"

namespace netadv {

struct SvmConfig {
  double c = 1.0;
  std::optional<double> gamma;  // defaults to 1 / d
  double tolerance = 1e-3;      // stopping threshold on the maximal KKT violation
  std::size_t cache_mb = 256;
  std::size_t max_iterations = 0;  // 0 = max(10^7, 100 n)
};

struct BinarySolution {
  std::vector<double> alpha;
  double bias = 0.0;  // decision(x) = sum_i alpha_i y_i K(x_i, x) + bias
  double kkt_gap = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

double rbf_kernel(std::span<const double> a, std::span<const double> b, double gamma);

// Sequential minimal optimization of the C-SVM dual with an RBF kernel,
// second-order working-set selection. `y` holds +1 / -1.
BinarySolution solve_binary_smo(const Matrix& x, std::span<const int> y, double c, double gamma,
                                double tolerance, std::size_t cache_bytes,
                                std::size_t max_iterations);

struct MachineInfo {
  std::size_t support_count = 0;
  std::size_t iterations = 0;
  double kkt_gap = 0.0;
  bool converged = false;
};

// One-vs-rest RBF SVM. Support vectors are pooled across machines; row c of
// the coefficient matrix holds alpha_i * y_i of machine c.
class SvmModel final : public Classifier {
 public:
  SvmModel() = default;
  SvmModel(double gamma, double c, Matrix support_vectors, Eigen::MatrixXd coefficients,
           Eigen::VectorXd bias, std::vector<MachineInfo> machines);

  std::size_t input_dim() const override { return static_cast<std::size_t>(support_vectors_.cols()); }
  std::size_t num_classes() const override { return static_cast<std::size_t>(bias_.size()); }

  Vector scores(std::span<const double> x) const override;  // decision values

  double gamma() const { return gamma_; }
  double c() const { return c_; }
  const Matrix& support_vectors() const { return support_vectors_; }
  const Eigen::MatrixXd& coefficients() const { return coefficients_; }
  const Eigen::VectorXd& bias() const { return bias_; }
  const std::vector<MachineInfo>& machines() const { return machines_; }

 private:
  double gamma_ = 0.0;
  double c_ = 0.0;
  Matrix support_vectors_;
  Eigen::VectorXd sv_sq_norms_;
  Eigen::MatrixXd coefficients_;
  Eigen::VectorXd bias_;
  std::vector<MachineInfo> machines_;
};

// Throws ValidationError unless there are at least two classes and every
// class has a training sample.
SvmModel train_svm_rbf(const Dataset& train, const SvmConfig& cfg);

}  // namespace netadv

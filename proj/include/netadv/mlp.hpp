#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "netadv/classifier.hpp"

namespace netadv {

struct MlpConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 64;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
  std::vector<std::size_t> hidden = {100, 100, 100, 100};
};

struct DenseLayer {
  Eigen::MatrixXd weights;  // in x out
  Eigen::VectorXd bias;     // out
};

// Fully connected network: rectifier on hidden layers, softmax on the output.
class MlpModel final : public Classifier {
 public:
  MlpModel() = default;
  // Throws ValidationError when consecutive layer shapes do not chain or a
  // parameter is not finite.
  explicit MlpModel(std::vector<DenseLayer> layers);

  // Uniform initialization in +-sqrt(6 / fan_in), zero biases, drawn from a
  // generator seeded with `seed` in layer order.
  static MlpModel initialize(std::size_t input_dim, std::size_t num_classes,
                             const std::vector<std::size_t>& hidden, std::uint64_t seed);

  std::size_t input_dim() const override;
  std::size_t num_classes() const override;

  Vector scores(std::span<const double> x) const override;  // logits

  Vector predict_proba(std::span<const double> x) const { return distribution(x); }

  // Cross-entropy -log p_target(x).
  double loss(std::span<const double> x, std::size_t target) const;

  // d(-log p_target)/dx by backpropagation.
  Vector input_gradient(std::span<const double> x, std::size_t target) const;

  // Jacobian of the class probabilities w.r.t. the input, C x d.
  Eigen::MatrixXd probability_jacobian(std::span<const double> x) const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }

  bool operator==(const MlpModel& other) const;

 private:
  std::vector<DenseLayer> layers_;
};

struct MlpTrainResult {
  MlpModel model;
  std::vector<double> loss_history;  // mean training cross-entropy per epoch
};

// Mini-batch SGD on categorical cross-entropy. Identical data and config give
// bitwise-identical parameters. Throws TrainingError when the loss stops being
// finite.
MlpTrainResult train_mlp(const Dataset& train, const MlpConfig& cfg);

}  // namespace netadv

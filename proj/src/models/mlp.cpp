#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "netadv/error.hpp"
#include "netadv/mlp.hpp"

namespace netadv {
namespace {

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> x) {
  return {x.data(), static_cast<Eigen::Index>(x.size())};
}

MlpModel initialize_from(std::size_t input_dim, std::size_t num_classes,
                         const std::vector<std::size_t>& hidden, std::mt19937_64& rng) {
  std::vector<std::size_t> widths;
  widths.push_back(input_dim);
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(num_classes);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const auto in = static_cast<Eigen::Index>(widths[l]);
    const auto out = static_cast<Eigen::Index>(widths[l + 1]);
    const double limit = std::sqrt(6.0 / static_cast<double>(std::max<std::size_t>(1, widths[l])));
    std::uniform_real_distribution<double> dist(-limit, limit);
    DenseLayer layer{Eigen::MatrixXd(in, out), Eigen::VectorXd::Zero(out)};
    for (Eigen::Index i = 0; i < in; ++i) {
      for (Eigen::Index j = 0; j < out; ++j) layer.weights(i, j) = dist(rng);
    }
    layers.push_back(std::move(layer));
  }
  return MlpModel(std::move(layers));
}

}  // namespace

MlpModel::MlpModel(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ValidationError("mlp.layers", "network needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.bias.size() != layer.weights.cols()) {
      throw ValidationError("mlp.layers", "bias width mismatch in layer " + std::to_string(l));
    }
    if (l > 0 && layer.weights.rows() != layers_[l - 1].weights.cols()) {
      throw ValidationError("mlp.layers", "layer " + std::to_string(l) + " does not chain");
    }
    if (!layer.weights.allFinite() || !layer.bias.allFinite()) {
      throw ValidationError("mlp.layers", "non-finite parameter in layer " + std::to_string(l));
    }
  }
}

MlpModel MlpModel::initialize(std::size_t input_dim, std::size_t num_classes,
                              const std::vector<std::size_t>& hidden, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return initialize_from(input_dim, num_classes, hidden, rng);
}

std::size_t MlpModel::input_dim() const {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.front().weights.rows());
}

std::size_t MlpModel::num_classes() const {
  return layers_.empty() ? 0 : static_cast<std::size_t>(layers_.back().weights.cols());
}

Vector MlpModel::scores(std::span<const double> x) const {
  check_dim(x);
  Eigen::VectorXd a = as_vector(x);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::VectorXd z = layers_[l].weights.transpose() * a + layers_[l].bias;
    a = l + 1 < layers_.size() ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
  }
  return a;
}

double MlpModel::loss(std::span<const double> x, std::size_t target) const {
  const Vector z = scores(x);
  const double shift = z.maxCoeff();
  const double log_sum = shift + std::log((z.array() - shift).exp().sum());
  return log_sum - z(static_cast<Eigen::Index>(target));
}

Vector MlpModel::input_gradient(std::span<const double> x, std::size_t target) const {
  check_dim(x);
  if (target >= num_classes()) throw ValidationError("target", "class index out of range");
  std::vector<Eigen::VectorXd> pre(layers_.size());
  Eigen::VectorXd a = as_vector(x);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    pre[l] = layers_[l].weights.transpose() * a + layers_[l].bias;
    a = pre[l].cwiseMax(0.0);
  }
  Eigen::VectorXd delta = softmax(pre.back());
  delta(static_cast<Eigen::Index>(target)) -= 1.0;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    Eigen::VectorXd upstream = layers_[l].weights * delta;
    if (l == 0) return upstream;
    delta = upstream.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
  }
  return delta;
}

Eigen::MatrixXd MlpModel::probability_jacobian(std::span<const double> x) const {
  check_dim(x);
  std::vector<Eigen::VectorXd> pre(layers_.size());
  Eigen::VectorXd a = as_vector(x);
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    pre[l] = layers_[l].weights.transpose() * a + layers_[l].bias;
    a = pre[l].cwiseMax(0.0);
  }
  const Eigen::VectorXd p = softmax(pre.back());
  // Rows index classes: dp/dz = diag(p) - p p^T.
  Eigen::MatrixXd g = Eigen::MatrixXd(p.asDiagonal()) - p * p.transpose();
  for (std::size_t l = layers_.size(); l-- > 0;) {
    Eigen::MatrixXd upstream = g * layers_[l].weights.transpose();
    if (l == 0) return upstream;
    const Eigen::RowVectorXd mask = (pre[l - 1].array() > 0.0).cast<double>().matrix().transpose();
    g = upstream.array().rowwise() * mask.array();
  }
  return g;
}

bool MlpModel::operator==(const MlpModel& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& a = layers_[l];
    const auto& b = other.layers_[l];
    if (a.weights.rows() != b.weights.rows() || a.weights.cols() != b.weights.cols()) return false;
    if (a.weights != b.weights || a.bias != b.bias) return false;
  }
  return true;
}

MlpTrainResult train_mlp(const Dataset& train, const MlpConfig& cfg) {
  if (train.rows() == 0) throw ValidationError("train", "training set is empty");
  if (train.num_classes() < 2) throw ValidationError("train", "need at least two classes");
  if (cfg.batch_size == 0) throw ValidationError("model.batch_size", "must be positive");
  if (!(cfg.learning_rate > 0.0)) throw ValidationError("model.learning_rate", "must be positive");

  std::mt19937_64 rng(cfg.seed);
  MlpTrainResult result{initialize_from(train.dim(), train.num_classes(), cfg.hidden, rng), {}};
  auto& layers = result.model.layers();
  const std::size_t n = train.rows();
  const auto depth = layers.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<Eigen::MatrixXd> pre(depth);
  std::vector<Eigen::MatrixXd> act(depth + 1);

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total_loss = 0.0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t end = std::min(n, start + cfg.batch_size);
      const auto batch = static_cast<Eigen::Index>(end - start);
      act[0].resize(batch, static_cast<Eigen::Index>(train.dim()));
      for (Eigen::Index r = 0; r < batch; ++r) {
        act[0].row(r) = train.matrix.row(static_cast<Eigen::Index>(order[start + static_cast<std::size_t>(r)]));
      }
      for (std::size_t l = 0; l < depth; ++l) {
        pre[l] = act[l] * layers[l].weights;
        pre[l].rowwise() += layers[l].bias.transpose();
        act[l + 1] = l + 1 < depth ? Eigen::MatrixXd(pre[l].cwiseMax(0.0)) : pre[l];
      }
      // Softmax + cross-entropy, row by row.
      Eigen::MatrixXd delta = pre[depth - 1];
      for (Eigen::Index r = 0; r < batch; ++r) {
        const double shift = delta.row(r).maxCoeff();
        auto e = (delta.row(r).array() - shift).exp();
        const double sum = e.sum();
        const auto y = static_cast<Eigen::Index>(train.labels[order[start + static_cast<std::size_t>(r)]]);
        total_loss += std::log(sum) - (delta(r, y) - shift);
        delta.row(r) = e / sum;
        delta(r, y) -= 1.0;
      }
      delta /= static_cast<double>(batch);
      for (std::size_t l = depth; l-- > 0;) {
        const Eigen::MatrixXd grad_w = act[l].transpose() * delta;
        const Eigen::VectorXd grad_b = delta.colwise().sum().transpose();
        if (l > 0) {
          Eigen::MatrixXd upstream = delta * layers[l].weights.transpose();
          delta = upstream.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
        }
        layers[l].weights -= cfg.learning_rate * grad_w;
        layers[l].bias -= cfg.learning_rate * grad_b;
      }
    }
    const double mean_loss = total_loss / static_cast<double>(n);
    if (!std::isfinite(mean_loss)) throw TrainingError(epoch, "training loss is not finite");
    result.loss_history.push_back(mean_loss);
  }
  return result;
}

}  // namespace netadv

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "netadv/dataset.hpp"

namespace netadv {

// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(const Vector& v);

// Numerically stable softmax.
Vector softmax(const Vector& scores);

// Read-only interface shared by the victim models. Implementations are
// immutable after training and safe to share across threads.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual std::size_t input_dim() const = 0;
  virtual std::size_t num_classes() const = 0;

  // Per-class scores: logits for the MLP, one-vs-rest decision values for the SVM.
  virtual Vector scores(std::span<const double> x) const = 0;

  // Output distribution over classes (softmax of the scores).
  virtual Vector distribution(std::span<const double> x) const { return softmax(scores(x)); }

  std::size_t predict(std::span<const double> x) const { return argmax(scores(x)); }

  std::vector<std::size_t> predict_all(const Matrix& rows, std::size_t workers = 1) const;
  Matrix distribution_all(const Matrix& rows, std::size_t workers = 1) const;

 protected:
  void check_dim(std::span<const double> x) const;
};

double accuracy(const Classifier& model, const Dataset& data, std::size_t workers = 1);

}  // namespace netadv

#include <cmath>

#include "netadv/classifier.hpp"
#include "netadv/error.hpp"
#include "netadv/parallel.hpp"

namespace netadv {

std::size_t argmax(const Vector& v) {
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(static_cast<Eigen::Index>(best))) best = static_cast<std::size_t>(i);
  }
  return best;
}

Vector softmax(const Vector& scores) {
  if (scores.size() == 0) return scores;
  const double shift = scores.maxCoeff();
  Vector p = (scores.array() - shift).exp();
  return p / p.sum();
}

void Classifier::check_dim(std::span<const double> x) const {
  if (x.size() != input_dim()) throw DimensionError(input_dim(), x.size());
}

std::vector<std::size_t> Classifier::predict_all(const Matrix& rows, std::size_t workers) const {
  std::vector<std::size_t> out(static_cast<std::size_t>(rows.rows()));
  parallel_for(out.size(), workers, [&](std::size_t i) {
    out[i] = predict({rows.row(static_cast<Eigen::Index>(i)).data(), static_cast<std::size_t>(rows.cols())});
  });
  return out;
}

Matrix Classifier::distribution_all(const Matrix& rows, std::size_t workers) const {
  Matrix out(rows.rows(), static_cast<Eigen::Index>(num_classes()));
  parallel_for(static_cast<std::size_t>(rows.rows()), workers, [&](std::size_t i) {
    const auto r = static_cast<Eigen::Index>(i);
    out.row(r) = distribution({rows.row(r).data(), static_cast<std::size_t>(rows.cols())}).transpose();
  });
  return out;
}

double accuracy(const Classifier& model, const Dataset& data, std::size_t workers) {
  if (data.rows() == 0) return 0.0;
  const auto predictions = model.predict_all(data.matrix, workers);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) correct += predictions[i] == data.labels[i];
  return static_cast<double>(correct) / static_cast<double>(data.rows());
}

}  // namespace netadv

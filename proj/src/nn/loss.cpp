#include "hyperaug/nn/loss.hpp"

#include <cmath>

#include "hyperaug/errors.hpp"

namespace hyperaug::nn {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

LossResult bce_with_logits(const Matrix& logits, const Matrix& targets) {
  if (logits.rows() != targets.rows() || logits.cols() != targets.cols()) {
    throw ShapeError("bce: logits and targets differ in shape");
  }
  const double n = static_cast<double>(logits.size());
  LossResult r;
  r.grad.resize(logits.rows(), logits.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const double z = logits.data()[i];
    const double y = targets.data()[i];
    // max(z,0) - z*y + log(1 + exp(-|z|))
    total += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    r.grad.data()[i] = (sigmoid(z) - y) / n;
  }
  r.loss = total / n;
  return r;
}

LossResult softmax_cross_entropy(const Matrix& logits, const Matrix& targets) {
  if (logits.rows() != targets.rows() || logits.cols() != targets.cols()) {
    throw ShapeError("cross entropy: logits and targets differ in shape");
  }
  const double batch = static_cast<double>(logits.rows());
  LossResult r;
  r.grad.resize(logits.rows(), logits.cols());
  double total = 0.0;
  for (Eigen::Index b = 0; b < logits.rows(); ++b) {
    const double m = logits.row(b).maxCoeff();
    const double lse = m + std::log((logits.row(b).array() - m).exp().sum());
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      const double log_p = logits(b, c) - lse;
      total -= targets(b, c) * log_p;
      r.grad(b, c) = (std::exp(log_p) - targets(b, c)) / batch;
    }
  }
  r.loss = total / batch;
  return r;
}

LossResult softmax_cross_entropy(const Matrix& logits, std::span<const int> classes) {
  if (static_cast<std::size_t>(logits.rows()) != classes.size()) {
    throw ShapeError("cross entropy: class index count != batch size");
  }
  Matrix one_hot = Matrix::Zero(logits.rows(), logits.cols());
  for (std::size_t b = 0; b < classes.size(); ++b) {
    if (classes[b] < 0 || classes[b] >= logits.cols()) {
      throw ShapeError("cross entropy: class index out of range");
    }
    one_hot(static_cast<Eigen::Index>(b), classes[b]) = 1.0;
  }
  return softmax_cross_entropy(logits, one_hot);
}

LossResult loss_and_gradient(LossKind kind, const Matrix& logits, const Matrix& targets) {
  if (kind == LossKind::binary_cross_entropy_with_sigmoid) return bce_with_logits(logits, targets);
  if (targets.cols() == 1 && logits.cols() > 1) {
    std::vector<int> classes(static_cast<std::size_t>(targets.rows()));
    for (std::size_t b = 0; b < classes.size(); ++b) {
      classes[b] = static_cast<int>(std::lround(targets(static_cast<Eigen::Index>(b), 0)));
    }
    return softmax_cross_entropy(logits, classes);
  }
  return softmax_cross_entropy(logits, targets);
}

}  // namespace hyperaug::nn

#pragma once

#include <span>
#include <string>

#include "hyperaug/nn/tensor.hpp"

namespace hyperaug::nn {

enum class LossKind { binary_cross_entropy_with_sigmoid, cross_entropy_with_softmax };

struct LossResult {
  double loss = 0.0;
  Matrix grad;  // d(mean loss) / d(logits)
};

// Mean over all elements of the logit-space BCE. Targets may be soft.
LossResult bce_with_logits(const Matrix& logits, const Matrix& targets);

// Mean over rows of softmax cross entropy against one-hot (or soft) targets.
LossResult softmax_cross_entropy(const Matrix& logits, const Matrix& targets);
LossResult softmax_cross_entropy(const Matrix& logits, std::span<const int> classes);

// Dispatch on kind. For cross entropy, a single-column target matrix is read
// as class indices.
LossResult loss_and_gradient(LossKind kind, const Matrix& logits, const Matrix& targets);

double sigmoid(double z);

}  // namespace hyperaug::nn

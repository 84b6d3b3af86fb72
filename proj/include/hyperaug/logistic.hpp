#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "hyperaug/nn/tensor.hpp"

namespace hyperaug {

// L2-regularized logistic regression, decision sigmoid(w.x + b) >= 0.5.
struct LogisticModel {
  Vector weights;
  double bias = 0.0;
  double l2_strength = 0.0;

  double probability(const Vector& x) const;
  bool predict(const Vector& x) const { return probability(x) >= 0.5; }
  std::vector<int> predict(const Matrix& features) const;
};

struct LogisticFit {
  LogisticModel model;
  bool converged = false;
  std::size_t iterations = 0;
  // Objective before the first step and after every accepted step.
  std::vector<double> objective_trace;
};

// mean BCE + (l2_strength / 2) * ||w||^2; the bias is not penalized.
double lr_objective(const LogisticModel& model, const Matrix& features, std::span<const int> labels);

// Full-batch gradient descent with Armijo backtracking from w = 0, b = 0.
// Converged when the gradient infinity-norm drops below tol. Throws
// DegenerateInputError when only one class is present.
LogisticFit lr_fit(const Matrix& features, std::span<const int> labels, double l2_strength,
                   double tol = 1e-6, std::size_t max_iter = 1000);

// l2_strength matching C = 1 in the usual C-parameterised objective.
inline double default_l2_strength(std::size_t n_examples) {
  return n_examples > 0 ? 1.0 / static_cast<double>(n_examples) : 1.0;
}

void write_logistic(std::ostream& out, const LogisticModel& model);
LogisticModel read_logistic(std::istream& in);

}  // namespace hyperaug

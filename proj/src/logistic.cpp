#include "hyperaug/logistic.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "hyperaug/errors.hpp"
#include "hyperaug/nn/loss.hpp"

namespace hyperaug {

double LogisticModel::probability(const Vector& x) const {
  if (x.size() != weights.size()) throw ShapeError("logistic: feature dim mismatch");
  return nn::sigmoid(weights.dot(x) + bias);
}

std::vector<int> LogisticModel::predict(const Matrix& features) const {
  if (features.cols() != weights.size()) throw ShapeError("logistic: feature dim mismatch");
  const Vector z = (features * weights).array() + bias;
  std::vector<int> out(static_cast<std::size_t>(z.size()));
  for (Eigen::Index i = 0; i < z.size(); ++i) out[static_cast<std::size_t>(i)] = z[i] >= 0.0 ? 1 : 0;
  return out;
}

namespace {

struct Evaluation {
  double objective;
  Vector grad_w;
  double grad_b;
};

double objective_at(const Vector& w, double b, double l2, const Matrix& x, const Vector& y) {
  const Vector z = (x * w).array() + b;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    loss += std::max(z[i], 0.0) - z[i] * y[i] + std::log1p(std::exp(-std::abs(z[i])));
  }
  return loss / static_cast<double>(z.size()) + 0.5 * l2 * w.squaredNorm();
}

Evaluation evaluate(const Vector& w, double b, double l2, const Matrix& x, const Vector& y) {
  const Vector z = (x * w).array() + b;
  Vector residual(z.size());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    loss += std::max(z[i], 0.0) - z[i] * y[i] + std::log1p(std::exp(-std::abs(z[i])));
    residual[i] = nn::sigmoid(z[i]) - y[i];
  }
  const double n = static_cast<double>(z.size());
  return {loss / n + 0.5 * l2 * w.squaredNorm(), x.transpose() * residual / n + l2 * w, residual.sum() / n};
}

}  // namespace

double lr_objective(const LogisticModel& model, const Matrix& features, std::span<const int> labels) {
  Vector y(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) y[static_cast<Eigen::Index>(i)] = labels[i];
  return objective_at(model.weights, model.bias, model.l2_strength, features, y);
}

LogisticFit lr_fit(const Matrix& features, std::span<const int> labels, double l2_strength, double tol,
                   std::size_t max_iter) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw ShapeError("lr_fit: feature rows != label count");
  }
  if (!(l2_strength >= 0.0)) throw ValidationError("lr_fit: l2_strength must be >= 0");
  std::size_t pos = 0;
  for (int l : labels) pos += l == 1 ? 1 : 0;
  if (pos == 0 || pos == labels.size()) throw DegenerateInputError("lr_fit: need examples of both classes");
  if (!features.allFinite()) throw NumericError("lr_fit: non-finite feature");

  Vector y(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) y[static_cast<Eigen::Index>(i)] = labels[i] == 1 ? 1.0 : 0.0;

  LogisticFit fit;
  fit.model.weights = Vector::Zero(features.cols());
  fit.model.l2_strength = l2_strength;
  Vector& w = fit.model.weights;
  double& b = fit.model.bias;

  auto current = evaluate(w, b, l2_strength, features, y);
  fit.objective_trace.push_back(current.objective);
  double step = 1.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    const double g_inf = std::max(current.grad_w.size() ? current.grad_w.cwiseAbs().maxCoeff() : 0.0,
                                  std::abs(current.grad_b));
    if (g_inf < tol) {
      fit.converged = true;
      break;
    }
    const double g_sq = current.grad_w.squaredNorm() + current.grad_b * current.grad_b;
    // Armijo backtracking, then let the next trial step grow again.
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings) {
      const Vector w_try = w - step * current.grad_w;
      const double b_try = b - step * current.grad_b;
      const double f_try = objective_at(w_try, b_try, l2_strength, features, y);
      if (f_try <= current.objective - 0.5 * step * g_sq) {
        w = w_try;
        b = b_try;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    fit.iterations = it + 1;
    if (!accepted) break;  // no descent possible at machine precision
    current = evaluate(w, b, l2_strength, features, y);
    fit.objective_trace.push_back(current.objective);
    step *= 2.0;
  }
  if (!fit.converged) {
    const double g_inf = std::max(current.grad_w.size() ? current.grad_w.cwiseAbs().maxCoeff() : 0.0,
                                  std::abs(current.grad_b));
    fit.converged = g_inf < tol;
  }
  return fit;
}

void write_logistic(std::ostream& out, const LogisticModel& model) {
  const auto old = out.precision(17);
  out << "hyperaug-logistic 1\n";
  out << model.weights.size() << ' ' << model.l2_strength << ' ' << model.bias << '\n';
  for (Eigen::Index i = 0; i < model.weights.size(); ++i) out << (i ? " " : "") << model.weights[i];
  out << '\n';
  out.precision(old);
}

LogisticModel read_logistic(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "hyperaug-logistic" || version != 1) {
    throw ParseError("logistic", 1, "not a version-1 logistic model file");
  }
  Eigen::Index n = 0;
  LogisticModel m;
  if (!(in >> n >> m.l2_strength >> m.bias) || n < 0) throw ParseError("logistic", 2, "bad header");
  m.weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(in >> m.weights[i])) throw ParseError("logistic", 3, "truncated weights");
  }
  return m;
}

}  // namespace hyperaug

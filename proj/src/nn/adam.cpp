#include "hyperaug/nn/adam.hpp"

#include <cmath>
#include <string>

#include "hyperaug/errors.hpp"

namespace hyperaug::nn {

namespace {

void check_finite(std::span<const double> grads) {
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw NumericError("non-finite gradient at index " + std::to_string(i));
    }
  }
}

void apply(AdamState& s, std::span<double> params, std::span<const double> grads) {
  if (s.first_moment.empty()) {
    s.first_moment.assign(params.size(), 0.0);
    s.second_moment.assign(params.size(), 0.0);
  }
  if (s.first_moment.size() != params.size()) throw ShapeError("adam: moment shape mismatch");
  s.step_count += 1;
  const auto& c = s.config;
  const double t = static_cast<double>(s.step_count);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    s.first_moment[i] = c.beta1 * s.first_moment[i] + (1.0 - c.beta1) * g;
    s.second_moment[i] = c.beta2 * s.second_moment[i] + (1.0 - c.beta2) * g * g;
    const double m_hat = s.first_moment[i] / correction1;
    const double v_hat = s.second_moment[i] / correction2;
    params[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
  }
}

}  // namespace

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads) {
  if (params.size() != grads.size()) throw ShapeError("adam: params and grads differ in size");
  check_finite(grads);
  apply(state, params, grads);
}

void Adam::step(const std::vector<ParamView>& params) {
  if (states_.empty()) {
    states_.resize(params.size());
    for (auto& s : states_) s.config = config_;
  }
  if (states_.size() != params.size()) throw ShapeError("adam: parameter list changed shape");
  for (const auto& p : params) {
    if (p.value.size() != p.grad.size()) throw ShapeError("adam: params and grads differ in size");
    check_finite(p.grad);
  }
  for (std::size_t i = 0; i < params.size(); ++i) apply(states_[i], params[i].value, params[i].grad);
  ++steps_;
}

}  // namespace hyperaug::nn

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hyperaug/nn/layers.hpp"

namespace hyperaug::nn {

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Optimizer state for one parameter tensor.
struct AdamState {
  AdamConfig config;
  std::uint64_t step_count = 0;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
};

// Bias-corrected ADAM update in place. Throws NumericError on a non-finite
// gradient, before touching any state.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads);

// ADAM over every parameter tensor of a network, matched by position.
class Adam {
 public:
  explicit Adam(AdamConfig config) : config_(config) {}

  void step(const std::vector<ParamView>& params);
  std::uint64_t step_count() const { return steps_; }
  const std::vector<AdamState>& states() const { return states_; }

 private:
  AdamConfig config_;
  std::uint64_t steps_ = 0;
  std::vector<AdamState> states_;
};

}  // namespace hyperaug::nn

#pragma once

#include <algorithm>
#include <vector>

#include "hyperaug/nn/loss.hpp"
#include "hyperaug/nn/network.hpp"
#include "oracles.hpp"

namespace oracle {

// Max relative error between backprop and central differences over every
// parameter and every input entry of `net`, with a mean BCE head on targets.
// The mode must make the forward pass deterministic (no train-mode dropout).
inline double max_gradient_error(hyperaug::nn::Network& net, Matrix x, const Matrix& targets,
                                 hyperaug::nn::Mode mode, double h = 1e-5) {
  using namespace hyperaug;
  const Matrix logits = net.forward(x, mode);
  const auto loss = nn::bce_with_logits(logits, targets);
  const Matrix input_grad = net.backward(loss.grad);
  auto params = net.parameters();
  std::vector<std::vector<double>> grads;
  for (const auto& p : params) grads.emplace_back(p.grad.begin(), p.grad.end());

  auto f = [&] { return nn::bce_with_logits(net.forward(x, mode), targets).loss; };
  double worst = 0.0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t i = 0; i < params[t].value.size(); ++i) {
      const double numeric = central_difference(f, &params[t].value[i], h);
      worst = std::max(worst, relative_error(grads[t][i], numeric));
    }
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double numeric = central_difference(f, x.data() + i, h);
    worst = std::max(worst, relative_error(input_grad.data()[i], numeric));
  }
  return worst;
}

}  // namespace oracle

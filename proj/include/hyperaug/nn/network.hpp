#pragma once

#include <iosfwd>
#include <vector>

#include "hyperaug/nn/layers.hpp"

namespace hyperaug::nn {

// A sequential stack of layers. Plain value type: copying a network copies
// all parameters and dropout RNG states, which is how training snapshots work.
class Network {
 public:
  Network() = default;
  explicit Network(std::vector<Layer> layers) : layers_(std::move(layers)) {}

  void add(Layer layer) { layers_.push_back(std::move(layer)); }

  Matrix forward(const Matrix& x, Mode mode);
  // Backpropagates through the cached forward pass. Overwrites every layer's
  // parameter gradients and returns the gradient w.r.t. the network input.
  Matrix backward(const Matrix& grad_out);
  std::vector<ParamView> parameters();

  std::size_t size() const { return layers_.size(); }
  Layer& operator[](std::size_t i) { return layers_[i]; }
  const Layer& operator[](std::size_t i) const { return layers_[i]; }
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  std::size_t parameter_count();

 private:
  std::vector<Layer> layers_;
};

// Text parameter format, full double precision. Dropout masks and RNG
// positions are not persisted; dropout layers are reseeded from their seed.
void write_network(std::ostream& out, const Network& net);
Network read_network(std::istream& in);

}  // namespace hyperaug::nn

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hyperaug/nn/tensor.hpp"
#include "hyperaug/random.hpp"

namespace hyperaug::nn {

enum class Mode { train, eval };

enum class ActivationKind { tanh, relu, sigmoid };

std::string to_string(ActivationKind kind);
ActivationKind parse_activation(const std::string& name);

// Elementwise activation, no caching.
Matrix activate(ActivationKind kind, const Matrix& x);

// A mutable view of one parameter tensor and its most recent gradient.
struct ParamView {
  std::span<double> value;
  std::span<const double> grad;
};

// y = x W^T + b, W is [out x in].
class DenseLayer {
 public:
  // Uniform init in +-1/sqrt(in_dim) for weights and bias.
  DenseLayer(std::size_t in_dim, std::size_t out_dim, Rng& rng);
  DenseLayer(Matrix weights, Vector bias);

  Matrix forward(const Matrix& x, Mode mode);
  Matrix backward(const Matrix& grad_out);
  std::vector<ParamView> parameters();

  std::size_t in_dim() const { return static_cast<std::size_t>(weights_.cols()); }
  std::size_t out_dim() const { return static_cast<std::size_t>(weights_.rows()); }
  const Matrix& weights() const { return weights_; }
  const Vector& bias() const { return bias_; }
  Matrix& weights() { return weights_; }
  Vector& bias() { return bias_; }
  const Matrix& weight_grad() const { return grad_weights_; }
  const Vector& bias_grad() const { return grad_bias_; }

 private:
  Matrix weights_;
  Vector bias_;
  Matrix grad_weights_;
  Vector grad_bias_;
  std::optional<Matrix> input_;
};

// Per-feature batch normalization. Train mode normalizes with biased batch
// statistics and updates running estimates; eval mode uses the running ones.
class BatchNormLayer {
 public:
  explicit BatchNormLayer(std::size_t dim, double momentum = 0.1, double epsilon = 1e-5);

  Matrix forward(const Matrix& x, Mode mode);
  Matrix backward(const Matrix& grad_out);
  std::vector<ParamView> parameters();

  std::size_t dim() const { return static_cast<std::size_t>(gamma_.size()); }
  double momentum() const { return momentum_; }
  double epsilon() const { return epsilon_; }
  Vector& gamma() { return gamma_; }
  Vector& beta() { return beta_; }
  Vector& running_mean() { return running_mean_; }
  Vector& running_var() { return running_var_; }
  const Vector& gamma() const { return gamma_; }
  const Vector& beta() const { return beta_; }
  const Vector& running_mean() const { return running_mean_; }
  const Vector& running_var() const { return running_var_; }
  const Vector& gamma_grad() const { return grad_gamma_; }
  const Vector& beta_grad() const { return grad_beta_; }
  // Normalized pre-scale activations of the last forward pass.
  const Matrix& last_normalized() const;

 private:
  Vector gamma_, beta_, running_mean_, running_var_;
  Vector grad_gamma_, grad_beta_;
  double momentum_;
  double epsilon_;
  struct Cache {
    Matrix normalized;
    Vector inv_std;
    Mode mode;
  };
  std::optional<Cache> cache_;
};

// Inverted dropout: survivors are scaled by 1/(1-rate) in train mode, eval
// mode is the identity.
class DropoutLayer {
 public:
  DropoutLayer(double rate, std::uint64_t seed);

  Matrix forward(const Matrix& x, Mode mode);
  Matrix backward(const Matrix& grad_out);
  std::vector<ParamView> parameters() { return {}; }

  double rate() const { return rate_; }
  std::uint64_t seed() const { return seed_; }
  void reseed(std::uint64_t seed);

 private:
  double rate_;
  std::uint64_t seed_;
  Rng rng_;
  std::optional<Matrix> mask_;
};

class ActivationLayer {
 public:
  explicit ActivationLayer(ActivationKind kind) : kind_(kind) {}

  Matrix forward(const Matrix& x, Mode mode);
  Matrix backward(const Matrix& grad_out);
  std::vector<ParamView> parameters() { return {}; }

  ActivationKind kind() const { return kind_; }

 private:
  ActivationKind kind_;
  std::optional<Matrix> output_;
};

using Layer = std::variant<DenseLayer, BatchNormLayer, DropoutLayer, ActivationLayer>;

}  // namespace hyperaug::nn

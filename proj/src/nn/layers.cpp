#include "hyperaug/nn/layers.hpp"

#include <cmath>

#include "hyperaug/errors.hpp"

namespace hyperaug::nn {

namespace {

std::span<double> span_of(Matrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
std::span<double> span_of(Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::span<const double> cspan_of(const Matrix& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
std::span<const double> cspan_of(const Vector& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

void require_cols(const Matrix& x, std::size_t cols, const char* who) {
  if (static_cast<std::size_t>(x.cols()) != cols) {
    throw ShapeError(std::string(who) + ": expected " + std::to_string(cols) +
                     " input columns, got " + std::to_string(x.cols()));
  }
}

}  // namespace

std::string to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::tanh: return "tanh";
    case ActivationKind::relu: return "relu";
    case ActivationKind::sigmoid: return "sigmoid";
  }
  return "?";
}

ActivationKind parse_activation(const std::string& name) {
  if (name == "tanh") return ActivationKind::tanh;
  if (name == "relu") return ActivationKind::relu;
  if (name == "sigmoid") return ActivationKind::sigmoid;
  throw ConfigError("unknown activation '" + name + "'");
}

Matrix activate(ActivationKind kind, const Matrix& x) {
  switch (kind) {
    case ActivationKind::tanh: return x.array().tanh().matrix();
    case ActivationKind::relu: return x.array().max(0.0).matrix();
    case ActivationKind::sigmoid:
      return x.unaryExpr([](double z) {
        if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
        const double e = std::exp(z);
        return e / (1.0 + e);
      });
  }
  return x;
}

// ---------------------------------------------------------------- dense

DenseLayer::DenseLayer(std::size_t in_dim, std::size_t out_dim, Rng& rng) {
  if (in_dim == 0 || out_dim == 0) throw ShapeError("dense layer dimensions must be >= 1");
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  std::uniform_real_distribution<double> u(-bound, bound);
  weights_.resize(static_cast<Eigen::Index>(out_dim), static_cast<Eigen::Index>(in_dim));
  for (Eigen::Index i = 0; i < weights_.size(); ++i) weights_.data()[i] = u(rng);
  bias_.resize(static_cast<Eigen::Index>(out_dim));
  for (Eigen::Index i = 0; i < bias_.size(); ++i) bias_[i] = u(rng);
  grad_weights_ = Matrix::Zero(weights_.rows(), weights_.cols());
  grad_bias_ = Vector::Zero(bias_.size());
}

DenseLayer::DenseLayer(Matrix weights, Vector bias)
    : weights_(std::move(weights)), bias_(std::move(bias)) {
  if (weights_.rows() == 0 || weights_.cols() == 0) {
    throw ShapeError("dense layer dimensions must be >= 1");
  }
  if (bias_.size() != weights_.rows()) throw ShapeError("dense bias length != out_dim");
  grad_weights_ = Matrix::Zero(weights_.rows(), weights_.cols());
  grad_bias_ = Vector::Zero(bias_.size());
}

Matrix DenseLayer::forward(const Matrix& x, Mode) {
  require_cols(x, in_dim(), "dense_forward");
  input_ = x;
  Matrix y = x * weights_.transpose();
  y.rowwise() += bias_.transpose();
  return y;
}

Matrix DenseLayer::backward(const Matrix& grad_out) {
  if (!input_) throw StateError("dense backward called without a forward pass");
  require_cols(grad_out, out_dim(), "dense_backward");
  if (grad_out.rows() != input_->rows()) throw ShapeError("dense_backward: batch size mismatch");
  grad_weights_ = grad_out.transpose() * (*input_);
  grad_bias_ = grad_out.colwise().sum().transpose();
  return grad_out * weights_;
}

std::vector<ParamView> DenseLayer::parameters() {
  return {{span_of(weights_), cspan_of(grad_weights_)}, {span_of(bias_), cspan_of(grad_bias_)}};
}

// ---------------------------------------------------------------- batch norm

BatchNormLayer::BatchNormLayer(std::size_t dim, double momentum, double epsilon)
    : gamma_(Vector::Ones(static_cast<Eigen::Index>(dim))),
      beta_(Vector::Zero(static_cast<Eigen::Index>(dim))),
      running_mean_(Vector::Zero(static_cast<Eigen::Index>(dim))),
      running_var_(Vector::Ones(static_cast<Eigen::Index>(dim))),
      grad_gamma_(Vector::Zero(static_cast<Eigen::Index>(dim))),
      grad_beta_(Vector::Zero(static_cast<Eigen::Index>(dim))),
      momentum_(momentum),
      epsilon_(epsilon) {
  if (dim == 0) throw ShapeError("batch norm dimension must be >= 1");
  if (!(momentum > 0.0 && momentum <= 1.0)) throw ValidationError("batch norm momentum must be in (0,1]");
  if (!(epsilon > 0.0)) throw ValidationError("batch norm epsilon must be > 0");
}

Matrix BatchNormLayer::forward(const Matrix& x, Mode mode) {
  require_cols(x, dim(), "batchnorm_forward");
  const auto batch = x.rows();
  Cache cache;
  cache.mode = mode;
  if (mode == Mode::train) {
    if (batch < 2) throw ShapeError("batch norm in train mode needs a batch of at least 2");
    const Vector mean = x.colwise().mean().transpose();
    Matrix centered = x.rowwise() - mean.transpose();
    const Vector var = centered.array().square().colwise().mean().transpose();
    cache.inv_std = (var.array() + epsilon_).rsqrt().matrix();
    cache.normalized = centered.array().rowwise() * cache.inv_std.transpose().array();
    const double unbias = static_cast<double>(batch) / static_cast<double>(batch - 1);
    running_mean_ = (1.0 - momentum_) * running_mean_ + momentum_ * mean;
    running_var_ = (1.0 - momentum_) * running_var_ + momentum_ * unbias * var;
  } else {
    cache.inv_std = (running_var_.array() + epsilon_).rsqrt().matrix();
    Matrix centered = x.rowwise() - running_mean_.transpose();
    cache.normalized = centered.array().rowwise() * cache.inv_std.transpose().array();
  }
  Matrix y = cache.normalized.array().rowwise() * gamma_.transpose().array();
  y.rowwise() += beta_.transpose();
  cache_ = std::move(cache);
  return y;
}

Matrix BatchNormLayer::backward(const Matrix& grad_out) {
  if (!cache_) throw StateError("batch norm backward called without a forward pass");
  require_cols(grad_out, dim(), "batchnorm_backward");
  const Matrix& xhat = cache_->normalized;
  if (grad_out.rows() != xhat.rows()) throw ShapeError("batchnorm_backward: batch size mismatch");
  grad_gamma_ = (grad_out.array() * xhat.array()).colwise().sum().transpose();
  grad_beta_ = grad_out.colwise().sum().transpose();
  const Matrix dxhat = grad_out.array().rowwise() * gamma_.transpose().array();
  if (cache_->mode == Mode::eval) {
    return dxhat.array().rowwise() * cache_->inv_std.transpose().array();
  }
  const double n = static_cast<double>(xhat.rows());
  const Eigen::RowVectorXd sum_dxhat = dxhat.colwise().sum();
  const Eigen::RowVectorXd sum_dxhat_xhat = (dxhat.array() * xhat.array()).colwise().sum();
  Matrix dx = (n * dxhat.array()).matrix();
  dx.rowwise() -= sum_dxhat;
  dx -= (xhat.array().rowwise() * sum_dxhat_xhat.array()).matrix();
  dx = (dx.array().rowwise() * (cache_->inv_std.transpose().array() / n)).matrix();
  return dx;
}

std::vector<ParamView> BatchNormLayer::parameters() {
  return {{span_of(gamma_), cspan_of(grad_gamma_)}, {span_of(beta_), cspan_of(grad_beta_)}};
}

const Matrix& BatchNormLayer::last_normalized() const {
  if (!cache_) throw StateError("batch norm has not run a forward pass");
  return cache_->normalized;
}

// ---------------------------------------------------------------- dropout

DropoutLayer::DropoutLayer(double rate, std::uint64_t seed) : rate_(rate), seed_(seed), rng_(seed) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ValidationError("dropout rate must be in [0,1)");
}

void DropoutLayer::reseed(std::uint64_t seed) {
  seed_ = seed;
  rng_.seed(seed);
}

Matrix DropoutLayer::forward(const Matrix& x, Mode mode) {
  if (mode == Mode::eval || rate_ == 0.0) {
    mask_ = Matrix::Ones(x.rows(), x.cols());
    return x;
  }
  std::bernoulli_distribution keep(1.0 - rate_);
  const double scale = 1.0 / (1.0 - rate_);
  Matrix mask(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(rng_) ? scale : 0.0;
  Matrix y = x.cwiseProduct(mask);
  mask_ = std::move(mask);
  return y;
}

Matrix DropoutLayer::backward(const Matrix& grad_out) {
  if (!mask_) throw StateError("dropout backward called without a forward pass");
  if (grad_out.rows() != mask_->rows() || grad_out.cols() != mask_->cols()) {
    throw ShapeError("dropout_backward: gradient shape mismatch");
  }
  return grad_out.cwiseProduct(*mask_);
}

// ---------------------------------------------------------------- activation

Matrix ActivationLayer::forward(const Matrix& x, Mode) {
  output_ = activate(kind_, x);
  return *output_;
}

Matrix ActivationLayer::backward(const Matrix& grad_out) {
  if (!output_) throw StateError("activation backward called without a forward pass");
  const Matrix& y = *output_;
  if (grad_out.rows() != y.rows() || grad_out.cols() != y.cols()) {
    throw ShapeError("activation_backward: gradient shape mismatch");
  }
  switch (kind_) {
    case ActivationKind::tanh: return (grad_out.array() * (1.0 - y.array().square())).matrix();
    case ActivationKind::relu:
      return (grad_out.array() * (y.array() > 0.0).cast<double>()).matrix();
    case ActivationKind::sigmoid: return (grad_out.array() * y.array() * (1.0 - y.array())).matrix();
  }
  return grad_out;
}

}  // namespace hyperaug::nn

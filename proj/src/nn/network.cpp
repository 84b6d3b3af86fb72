#include "hyperaug/nn/network.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "hyperaug/errors.hpp"

namespace hyperaug::nn {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void write_values(std::ostream& out, const double* data, Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i) out << ' ';
    out << data[i];
  }
  out << '\n';
}

void read_values(std::istream& in, double* data, Eigen::Index n, const char* what) {
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(in >> data[i])) throw ParseError("network", 0, std::string("truncated ") + what);
  }
}

}  // namespace

Matrix Network::forward(const Matrix& x, Mode mode) {
  Matrix h = x;
  for (auto& layer : layers_) {
    h = std::visit([&](auto& l) { return l.forward(h, mode); }, layer);
  }
  return h;
}

Matrix Network::backward(const Matrix& grad_out) {
  Matrix g = grad_out;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) {
    g = std::visit([&](auto& l) { return l.backward(g); }, *it);
  }
  return g;
}

std::vector<ParamView> Network::parameters() {
  std::vector<ParamView> out;
  for (auto& layer : layers_) {
    auto p = std::visit([](auto& l) { return l.parameters(); }, layer);
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

std::size_t Network::parameter_count() {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.value.size();
  return n;
}

void write_network(std::ostream& out, const Network& net) {
  const auto old_precision = out.precision(17);
  out << "network " << net.size() << '\n';
  for (const auto& layer : net.layers()) {
    std::visit(overloaded{
                   [&](const DenseLayer& l) {
                     out << "dense " << l.in_dim() << ' ' << l.out_dim() << '\n';
                     write_values(out, l.weights().data(), l.weights().size());
                     write_values(out, l.bias().data(), l.bias().size());
                   },
                   [&](const BatchNormLayer& l) {
                     out << "batchnorm " << l.dim() << ' ' << l.momentum() << ' ' << l.epsilon()
                         << '\n';
                     write_values(out, l.gamma().data(), l.gamma().size());
                     write_values(out, l.beta().data(), l.beta().size());
                     write_values(out, l.running_mean().data(), l.running_mean().size());
                     write_values(out, l.running_var().data(), l.running_var().size());
                   },
                   [&](const DropoutLayer& l) {
                     out << "dropout " << l.rate() << ' ' << l.seed() << '\n';
                   },
                   [&](const ActivationLayer& l) {
                     out << "activation " << to_string(l.kind()) << '\n';
                   },
               },
               layer);
  }
  out.precision(old_precision);
}

Network read_network(std::istream& in) {
  std::string tag;
  std::size_t count = 0;
  if (!(in >> tag >> count) || tag != "network") {
    throw ParseError("network", 0, "expected 'network <layers>' header");
  }
  Network net;
  for (std::size_t i = 0; i < count; ++i) {
    if (!(in >> tag)) throw ParseError("network", 0, "truncated layer list");
    if (tag == "dense") {
      Eigen::Index in_dim = 0, out_dim = 0;
      if (!(in >> in_dim >> out_dim) || in_dim <= 0 || out_dim <= 0) {
        throw ParseError("network", 0, "bad dense header");
      }
      Matrix w(out_dim, in_dim);
      Vector b(out_dim);
      read_values(in, w.data(), w.size(), "dense weights");
      read_values(in, b.data(), b.size(), "dense bias");
      net.add(DenseLayer(std::move(w), std::move(b)));
    } else if (tag == "batchnorm") {
      std::size_t dim = 0;
      double momentum = 0, eps = 0;
      if (!(in >> dim >> momentum >> eps)) throw ParseError("network", 0, "bad batchnorm header");
      BatchNormLayer bn(dim, momentum, eps);
      const auto d = static_cast<Eigen::Index>(dim);
      read_values(in, bn.gamma().data(), d, "gamma");
      read_values(in, bn.beta().data(), d, "beta");
      read_values(in, bn.running_mean().data(), d, "running mean");
      read_values(in, bn.running_var().data(), d, "running var");
      net.add(std::move(bn));
    } else if (tag == "dropout") {
      double rate = 0;
      std::uint64_t seed = 0;
      if (!(in >> rate >> seed)) throw ParseError("network", 0, "bad dropout record");
      net.add(DropoutLayer(rate, seed));
    } else if (tag == "activation") {
      std::string kind;
      if (!(in >> kind)) throw ParseError("network", 0, "bad activation record");
      net.add(ActivationLayer(parse_activation(kind)));
    } else {
      throw ParseError("network", 0, "unknown layer tag '" + tag + "'");
    }
  }
  return net;
}

}  // namespace hyperaug::nn

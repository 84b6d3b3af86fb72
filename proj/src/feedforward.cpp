#include "hyperaug/feedforward.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "hyperaug/embeddings.hpp"
#include "hyperaug/errors.hpp"
#include "hyperaug/nn/adam.hpp"
#include "hyperaug/nn/loss.hpp"
#include "hyperaug/random.hpp"

namespace hyperaug {

std::string FeedforwardSpec::label() const {
  std::ostringstream s;
  s << hidden_sizes[0] << '-' << hidden_sizes[1] << '-' << hidden_sizes[2] << '/' << nn::to_string(activation)
    << '/' << dropout << '/' << to_string(aggregation);
  return s.str();
}

namespace {

nn::Network build_network(const FeedforwardSpec& spec, std::size_t input_dim, std::uint64_t seed) {
  for (auto h : spec.hidden_sizes) {
    if (h == 0) throw ValidationError("feedforward hidden sizes must be >= 1");
  }
  Rng rng(derive_seed(seed, {0}));
  nn::Network net;
  std::size_t in = input_dim;
  for (std::size_t i = 0; i < 3; ++i) {
    net.add(nn::DenseLayer(in, spec.hidden_sizes[i], rng));
    net.add(nn::ActivationLayer(spec.activation));
    net.add(nn::DropoutLayer(spec.dropout, derive_seed(seed, {1, i})));
    in = spec.hidden_sizes[i];
  }
  net.add(nn::DenseLayer(in, 2, rng));
  return net;
}

std::vector<int> argmax_rows(const Matrix& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) out[static_cast<std::size_t>(i)] = logits(i, 1) > logits(i, 0) ? 1 : 0;
  return out;
}

double accuracy_of(const std::vector<int>& predicted, const std::vector<int>& truth) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += predicted[i] == truth[i] ? 1 : 0;
  return truth.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(truth.size());
}

}  // namespace

FeedforwardModel::FeedforwardModel(FeedforwardSpec spec, std::size_t input_dim, std::uint64_t seed)
    : spec_(spec), input_dim_(input_dim), net_(build_network(spec, input_dim, seed)) {}

FeedforwardModel::FeedforwardModel(FeedforwardSpec spec, std::size_t input_dim, nn::Network net)
    : spec_(spec), input_dim_(input_dim), net_(std::move(net)) {}

std::vector<int> FeedforwardModel::predict(const Matrix& features) const {
  if (features.rows() == 0) return {};
  // Eval-mode forward passes do not change parameters; a scratch copy keeps
  // the layer caches out of this const object.
  nn::Network scratch = net_;
  return argmax_rows(scratch.forward(features, nn::Mode::eval));
}

std::vector<int> FeedforwardModel::predict(const std::vector<VectorPair>& examples) const {
  return predict(featurize(spec_.aggregation, examples));
}

bool EarlyStopping::observe(double score) {
  if (score > best_) {
    best_ = score;
    stale_ = 0;
    return true;
  }
  ++stale_;
  return false;
}

FeedforwardFit ff_fit(const FeedforwardSpec& spec, const TrainSpec& train, const std::vector<VectorPair>& examples,
                      const ValidationMetric& metric) {
  if (train.batch_size == 0 || train.epochs == 0) throw ValidationError("ff_fit: epochs and batch_size must be >= 1");
  if (!(train.validation_fraction > 0.0 && train.validation_fraction < 1.0)) {
    throw ValidationError("ff_fit: validation_fraction must be in (0,1)");
  }
  if (examples.size() < 2 * train.batch_size) {
    throw DataError("ff_fit: " + std::to_string(examples.size()) + " examples, need at least " +
                    std::to_string(2 * train.batch_size));
  }
  const Matrix features = featurize(spec.aggregation, examples);
  const std::vector<int> labels = labels_of(examples);

  Rng rng(derive_seed(train.seed, {10}));
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_val = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(train.validation_fraction * static_cast<double>(examples.size()))), 1,
      examples.size() - 1);
  std::vector<std::size_t> val_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> fit_idx(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  std::sort(val_idx.begin(), val_idx.end());
  std::sort(fit_idx.begin(), fit_idx.end());

  Matrix val_x(static_cast<Eigen::Index>(val_idx.size()), features.cols());
  std::vector<int> val_y;
  for (std::size_t i = 0; i < val_idx.size(); ++i) {
    val_x.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(val_idx[i]));
    val_y.push_back(labels[val_idx[i]]);
  }

  FeedforwardModel model(spec, static_cast<std::size_t>(features.cols()), derive_seed(train.seed, {11}));
  nn::Adam opt({train.learning_rate, 0.9, 0.999, 1e-8});
  FeedforwardFit fit{model, {}, 0, 0.0, false};
  EarlyStopping stopper(train.early_stop_patience);

  for (std::size_t epoch = 1; epoch <= train.epochs; ++epoch) {
    std::shuffle(fit_idx.begin(), fit_idx.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < fit_idx.size(); start += train.batch_size) {
      const std::size_t end = std::min(start + train.batch_size, fit_idx.size());
      Matrix x(static_cast<Eigen::Index>(end - start), features.cols());
      std::vector<int> y;
      for (std::size_t i = start; i < end; ++i) {
        x.row(static_cast<Eigen::Index>(i - start)) = features.row(static_cast<Eigen::Index>(fit_idx[i]));
        y.push_back(labels[fit_idx[i]]);
      }
      const Matrix logits = model.network().forward(x, nn::Mode::train);
      const auto loss = nn::softmax_cross_entropy(logits, y);
      if (!std::isfinite(loss.loss)) throw NumericError("ff_fit: non-finite loss in epoch " + std::to_string(epoch));
      loss_sum += loss.loss * static_cast<double>(end - start);
      model.network().backward(loss.grad);
      opt.step(model.network().parameters());
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(fit_idx.size());
    rec.validation_accuracy = metric ? metric(model, epoch) : accuracy_of(model.predict(val_x), val_y);
    fit.history.push_back(rec);
    if (stopper.observe(rec.validation_accuracy)) {
      fit.model = model;
      fit.best_epoch = epoch;
      fit.best_validation_accuracy = rec.validation_accuracy;
    }
    if (stopper.should_stop() && epoch < train.epochs) {
      fit.stopped_early = true;
      break;
    }
  }
  return fit;
}

FeedforwardFit ff_fit(const FeedforwardSpec& spec, const TrainSpec& train, const PairDataset& data,
                      const EmbeddingSpace& space) {
  return ff_fit(spec, train, to_vector_pairs(data, space));
}

void write_feedforward(std::ostream& out, const FeedforwardModel& model) {
  const auto& s = model.spec();
  out << "hyperaug-feedforward 1\n";
  out << "hidden " << s.hidden_sizes[0] << ' ' << s.hidden_sizes[1] << ' ' << s.hidden_sizes[2] << '\n';
  out << "activation " << nn::to_string(s.activation) << '\n';
  out << "dropout " << s.dropout << '\n';
  out << "aggregation " << to_string(s.aggregation) << '\n';
  out << "input_dim " << model.input_dim() << '\n';
  nn::write_network(out, model.network());
}

FeedforwardModel read_feedforward(std::istream& in) {
  std::string magic, key, value;
  int version = 0;
  if (!(in >> magic >> version) || magic != "hyperaug-feedforward" || version != 1) {
    throw ParseError("feedforward", 1, "not a version-1 feedforward model file");
  }
  FeedforwardSpec spec;
  std::size_t input_dim = 0;
  auto expect = [&](const char* k) {
    if (!(in >> key) || key != k) throw ParseError("feedforward", 0, std::string("expected '") + k + "'");
  };
  expect("hidden");
  in >> spec.hidden_sizes[0] >> spec.hidden_sizes[1] >> spec.hidden_sizes[2];
  expect("activation");
  in >> value;
  spec.activation = nn::parse_activation(value);
  expect("dropout");
  in >> spec.dropout;
  expect("aggregation");
  in >> value;
  spec.aggregation = parse_aggregation(value);
  expect("input_dim");
  in >> input_dim;
  if (!in) throw ParseError("feedforward", 0, "bad header");
  return FeedforwardModel(spec, input_dim, nn::read_network(in));
}

}  // namespace hyperaug

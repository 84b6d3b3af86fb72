#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "hyperaug/features.hpp"
#include "hyperaug/nn/network.hpp"

namespace hyperaug {

class EmbeddingSpace;

struct FeedforwardSpec {
  std::array<std::size_t, 3> hidden_sizes{200, 200, 200};
  nn::ActivationKind activation = nn::ActivationKind::tanh;
  double dropout = 0.0;
  AggregationKind aggregation = AggregationKind::concat_asym;

  bool operator==(const FeedforwardSpec&) const = default;
  // e.g. "200-100-50/tanh/0.1/concat_asym"
  std::string label() const;
};

inline constexpr std::size_t kNoEarlyStop = std::numeric_limits<std::size_t>::max();

struct TrainSpec {
  std::size_t epochs = 30;
  std::size_t early_stop_patience = 5;
  double validation_fraction = 0.1;
  double learning_rate = 0.01;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
};

// Three dense+activation+dropout hidden blocks and a 2-logit output.
class FeedforwardModel {
 public:
  FeedforwardModel(FeedforwardSpec spec, std::size_t input_dim, std::uint64_t seed);
  FeedforwardModel(FeedforwardSpec spec, std::size_t input_dim, nn::Network net);

  const FeedforwardSpec& spec() const { return spec_; }
  std::size_t input_dim() const { return input_dim_; }
  nn::Network& network() { return net_; }
  const nn::Network& network() const { return net_; }

  // Predicted class per feature row (eval mode).
  std::vector<int> predict(const Matrix& features) const;
  std::vector<int> predict(const std::vector<VectorPair>& examples) const;

 private:
  FeedforwardSpec spec_;
  std::size_t input_dim_;
  nn::Network net_;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double validation_accuracy = 0.0;
};

struct FeedforwardFit {
  FeedforwardModel model;  // best-validation snapshot
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  double best_validation_accuracy = 0.0;
  bool stopped_early = false;
};

// Replaces the held-out accuracy computation; receives the model after the
// given 1-based epoch. Used to script early-stopping scenarios.
using ValidationMetric = std::function<double(const FeedforwardModel&, std::size_t epoch)>;

// Tracks the best score and the run of non-improving epochs.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}
  // Returns true when this score is a new (strict) best.
  bool observe(double score);
  bool should_stop() const { return patience_ != kNoEarlyStop && stale_ >= patience_; }
  double best() const { return best_; }

 private:
  std::size_t patience_;
  std::size_t stale_ = 0;
  double best_ = -std::numeric_limits<double>::infinity();
};

// ADAM on softmax cross entropy, minibatches reshuffled every epoch, a held-out
// validation slice scored after each epoch. Throws DataError with fewer than
// 2 * batch_size examples.
FeedforwardFit ff_fit(const FeedforwardSpec& spec, const TrainSpec& train, const std::vector<VectorPair>& examples,
                      const ValidationMetric& metric = {});
FeedforwardFit ff_fit(const FeedforwardSpec& spec, const TrainSpec& train, const PairDataset& data,
                      const EmbeddingSpace& space);

void write_feedforward(std::ostream& out, const FeedforwardModel& model);
FeedforwardModel read_feedforward(std::istream& in);

}  // namespace hyperaug

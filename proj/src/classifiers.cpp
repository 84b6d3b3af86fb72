#include "hyperaug/classifiers.hpp"

#include <ostream>

#include "hyperaug/embeddings.hpp"
#include "hyperaug/errors.hpp"
#include "hyperaug/parallel.hpp"
#include "hyperaug/random.hpp"

namespace hyperaug {

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (truth.empty()) throw DataError("accuracy of an empty evaluation set");
  if (predicted.size() != truth.size()) throw ShapeError("accuracy: prediction count != label count");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

double evaluate(const FeedforwardModel& model, const std::vector<VectorPair>& examples) {
  if (examples.empty()) throw DataError("evaluate: empty evaluation set");
  return accuracy(model.predict(examples), labels_of(examples));
}

double evaluate(const LogisticModel& model, AggregationKind aggregation, const std::vector<VectorPair>& examples) {
  if (examples.empty()) throw DataError("evaluate: empty evaluation set");
  return accuracy(model.predict(featurize(aggregation, examples)), labels_of(examples));
}

double evaluate(const FeedforwardModel& model, const PairDataset& data, const EmbeddingSpace& space) {
  return evaluate(model, to_vector_pairs(data, space));
}

double evaluate(const LogisticModel& model, AggregationKind aggregation, const PairDataset& data,
                const EmbeddingSpace& space) {
  return evaluate(model, aggregation, to_vector_pairs(data, space));
}

std::vector<FeedforwardSpec> expand_grid(const std::vector<std::array<std::size_t, 3>>& hidden,
                                         const std::vector<nn::ActivationKind>& activations,
                                         const std::vector<double>& dropouts,
                                         const std::vector<AggregationKind>& aggregations) {
  std::vector<FeedforwardSpec> out;
  for (auto agg : aggregations) {
    for (const auto& h : hidden) {
      for (auto act : activations) {
        for (double p : dropouts) out.push_back({h, act, p, agg});
      }
    }
  }
  return out;
}

GridSearchResult grid_search(const PairDataset& data, const EmbeddingSpace& space,
                             const std::vector<FeedforwardSpec>& grid, const TrainSpec& train, std::size_t k,
                             std::uint64_t seed, std::size_t threads) {
  if (grid.empty()) throw ValidationError("grid_search: empty grid");
  const auto filtered = filter_to_vocabulary(data, space).dataset;
  const auto plan = stratified_folds(filtered, k, seed);
  const auto examples = to_vector_pairs(filtered, space);

  std::vector<std::vector<VectorPair>> fold_train(k), fold_test(k);
  for (std::size_t f = 0; f < k; ++f) {
    for (auto i : plan.train_indices(f)) fold_train[f].push_back(examples[i]);
    for (auto i : plan.test_indices(f)) fold_test[f].push_back(examples[i]);
  }

  std::vector<double> scores(grid.size() * k, 0.0);
  parallel_for(grid.size() * k, threads, [&](std::size_t task) {
    const std::size_t cell = task / k;
    const std::size_t fold = task % k;
    TrainSpec t = train;
    // Keyed on the cell's content, so duplicate cells train identically.
    t.seed = derive_seed(seed, {hash_string(grid[cell].label()), fold});
    const auto fit = ff_fit(grid[cell], t, fold_train[fold]);
    scores[task] = evaluate(fit.model, fold_test[fold]);
  });

  GridSearchResult result;
  double best = -1.0;
  for (std::size_t cell = 0; cell < grid.size(); ++cell) {
    GridCellResult row{grid[cell], {}, 0.0};
    for (std::size_t f = 0; f < k; ++f) row.fold_accuracies.push_back(scores[cell * k + f]);
    double sum = 0.0;
    for (double s : row.fold_accuracies) sum += s;
    row.mean_accuracy = sum / static_cast<double>(k);
    if (row.mean_accuracy > best) {
      best = row.mean_accuracy;
      result.best = grid[cell];
      result.best_index = cell;
    }
    result.table.push_back(std::move(row));
  }
  return result;
}

void write_grid_csv(std::ostream& out, const GridSearchResult& result) {
  const std::size_t k = result.table.empty() ? 0 : result.table.front().fold_accuracies.size();
  out << "cell,hidden,activation,dropout,aggregation,mean_accuracy";
  for (std::size_t f = 0; f < k; ++f) out << ",fold_" << f;
  out << ",best\n";
  const auto old = out.precision(10);
  for (std::size_t i = 0; i < result.table.size(); ++i) {
    const auto& r = result.table[i];
    const auto& s = r.spec;
    out << i << ',' << s.hidden_sizes[0] << '-' << s.hidden_sizes[1] << '-' << s.hidden_sizes[2] << ','
        << nn::to_string(s.activation) << ',' << s.dropout << ',' << to_string(s.aggregation) << ','
        << r.mean_accuracy;
    for (double a : r.fold_accuracies) out << ',' << a;
    out << ',' << (i == result.best_index ? 1 : 0) << '\n';
  }
  out.precision(old);
}

}  // namespace hyperaug

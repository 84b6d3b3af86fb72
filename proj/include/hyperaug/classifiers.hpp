#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hyperaug/datasets.hpp"
#include "hyperaug/features.hpp"
#include "hyperaug/feedforward.hpp"
#include "hyperaug/logistic.hpp"

namespace hyperaug {

class EmbeddingSpace;

// Fraction of matching entries. DataError when empty.
double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

double evaluate(const FeedforwardModel& model, const std::vector<VectorPair>& examples);
double evaluate(const LogisticModel& model, AggregationKind aggregation, const std::vector<VectorPair>& examples);
// Looks the pairs up in the space first; DataError if nothing survives.
double evaluate(const FeedforwardModel& model, const PairDataset& data, const EmbeddingSpace& space);
double evaluate(const LogisticModel& model, AggregationKind aggregation, const PairDataset& data,
                const EmbeddingSpace& space);

// Cartesian product in declaration order: aggregation outermost, then hidden
// sizes, activation, dropout.
std::vector<FeedforwardSpec> expand_grid(const std::vector<std::array<std::size_t, 3>>& hidden,
                                         const std::vector<nn::ActivationKind>& activations,
                                         const std::vector<double>& dropouts,
                                         const std::vector<AggregationKind>& aggregations);

struct GridCellResult {
  FeedforwardSpec spec;
  std::vector<double> fold_accuracies;
  double mean_accuracy = 0.0;
};

struct GridSearchResult {
  FeedforwardSpec best;
  std::size_t best_index = 0;
  std::vector<GridCellResult> table;
};

// k-fold stratified CV per grid cell on the in-vocabulary part of the data.
// Every (cell, fold) task seeds its model from (seed, cell spec, fold), so
// the result is identical for any thread count and duplicate cells tie.
// Ties go to the earlier cell.
GridSearchResult grid_search(const PairDataset& data, const EmbeddingSpace& space,
                             const std::vector<FeedforwardSpec>& grid, const TrainSpec& train, std::size_t k,
                             std::uint64_t seed, std::size_t threads = 1);

void write_grid_csv(std::ostream& out, const GridSearchResult& result);

}  // namespace hyperaug

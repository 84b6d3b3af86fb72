#pragma once

#include <string>
#include <vector>

#include "hyperaug/datasets.hpp"
#include "hyperaug/nn/tensor.hpp"

namespace hyperaug {

class EmbeddingSpace;

// A training or evaluation example in vector form. Original pairs are looked
// up in a space; augmentation pairs carry synthetic vectors directly.
struct VectorPair {
  Vector hypo;
  Vector hyper;
  bool positive = false;
};

enum class AggregationKind { diff, asym, concat_asym, hyper_only };

std::string to_string(AggregationKind kind);
AggregationKind parse_aggregation(const std::string& name);
std::size_t aggregated_dim(AggregationKind kind, std::size_t d);

// diff = hypo - hyper; asym = [diff, diff^2]; concat_asym = [hypo, hyper,
// diff, diff^2]; hyper_only = hyper.
Vector aggregate(AggregationKind kind, const Vector& hypo, const Vector& hyper);

// One aggregated row per example.
Matrix featurize(AggregationKind kind, const std::vector<VectorPair>& examples);
std::vector<int> labels_of(const std::vector<VectorPair>& examples);

// Looks up both tokens of every pair. Pairs with an OOV token are skipped
// and counted in *dropped when given.
std::vector<VectorPair> to_vector_pairs(const PairDataset& data, const EmbeddingSpace& space,
                                        std::size_t* dropped = nullptr);

}  // namespace hyperaug

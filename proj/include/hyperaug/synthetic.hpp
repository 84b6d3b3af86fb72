#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "hyperaug/compose.hpp"
#include "hyperaug/datasets.hpp"
#include "hyperaug/embeddings.hpp"
#include "hyperaug/taxonomy.hpp"

namespace hyperaug {

// A random embedding space with a planted three-level IS-A hierarchy.
// Coordinates are split into three blocks. Roots are random in block 0, a
// middle node adds a random block-1 part to its root, a leaf adds a random
// block-2 part to its middle node, and every word gets small isotropic noise.
// Zeroing the finer blocks of a word (a linear projection) recovers its
// ancestors up to noise. Modifiers live in block 2 only, so modifier+middle
// composes into something shaped like a leaf of that middle node.
struct SyntheticWorldConfig {
  std::size_t dim = 16;
  std::size_t roots = 20;
  std::size_t middles_per_root = 3;
  std::size_t leaves_per_middle = 6;
  std::size_t modifiers = 60;
  double noise = 0.05;
  // Mean of the block-1 and block-2 parts (block 0 is centred). A nonzero
  // mean makes the depth of a word visible to a small network.
  double detail_mean = 1.0;
  // Training pairs come from the first roots - test_roots subtrees, test
  // pairs from the last test_roots subtrees, so the two share no word.
  // Both are balanced positives/negatives over the planted closure.
  std::size_t test_roots = 5;
  std::size_t dataset_pairs = 800;
  std::size_t test_pairs = 300;
  // Share of negatives that are reversed closure pairs; the rest are random
  // pairs with no ancestor relation either way.
  double reversed_negative_share = 0.25;
  // Compound inventory: this many distinct modifiers per middle node.
  std::size_t modifiers_per_noun = 3;
  std::uint64_t seed = 0;
};

struct SyntheticWorld {
  EmbeddingSpace space;
  Taxonomy taxonomy;
  PairDataset dataset;
  PairDataset test;
  std::vector<CompoundSpec> compounds;
};

SyntheticWorld make_synthetic_world(const SyntheticWorldConfig& config);

// Writes space.txt, taxonomy.tsv, pairs.tsv, test.tsv and compounds.tsv into
// dir.
void save_synthetic_world(const std::filesystem::path& dir, const SyntheticWorld& world);

}  // namespace hyperaug

#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hyperaug/datasets.hpp"
#include "hyperaug/features.hpp"
#include "hyperaug/nn/tensor.hpp"

namespace hyperaug {

class EmbeddingSpace;

struct AugmentedPair {
  std::string hypo_token;
  std::string hyper_token;
  Vector hypo;
  Vector hyper;
  bool positive = true;
  Provenance provenance = Provenance::compose_aug;
  bool hypo_synthetic = false;
  bool hyper_synthetic = false;
  // Real vocabulary words the pair was derived from; the harness leakage
  // audit checks these against evaluation tokens.
  std::set<std::string> source_tokens;
};

// Generated pairs of (possibly synthetic) vectors. A synthetic token name
// always denotes one vector: re-adding a name with a different vector throws
// DuplicateError.
class AugmentationSet {
 public:
  AugmentationSet() = default;
  explicit AugmentationSet(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<AugmentedPair>& entries() const { return entries_; }
  const AugmentedPair& operator[](std::size_t i) const { return entries_[i]; }

  void add(AugmentedPair entry);
  // The first n entries (all if n >= size).
  AugmentationSet prefix(std::size_t n) const;
  AugmentationSet select(const std::vector<std::size_t>& indices) const;

  // Unique synthetic vectors in first-appearance order.
  std::vector<std::string> synthetic_tokens() const;
  Matrix synthetic_vectors() const;
  // Real tokens named anywhere in the set (synthetic names excluded).
  std::set<std::string> referenced_real_tokens() const;

  std::vector<VectorPair> vector_pairs() const;

 private:
  std::size_t dim_ = 0;
  std::vector<AugmentedPair> entries_;
  // synthetic name -> (entry index, true when on the hypernym side)
  std::map<std::string, std::pair<std::size_t, bool>> synthetic_index_;
};

// Writes "<stem>.vectors.txt" (word2vec text format, synthetic tokens only)
// and "<stem>.pairs.tsv" (dataset TSV with provenance column).
void save_augmentation(const std::filesystem::path& stem, const AugmentationSet& set);

// Inverse of save_augmentation; names not found among the synthetic vectors
// are resolved in the real space (LookupError if absent there too).
AugmentationSet load_augmentation(const std::filesystem::path& stem, const EmbeddingSpace& real_space);

std::filesystem::path augmentation_vectors_path(const std::filesystem::path& stem);
std::filesystem::path augmentation_pairs_path(const std::filesystem::path& stem);

}  // namespace hyperaug

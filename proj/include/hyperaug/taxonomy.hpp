#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hyperaug/datasets.hpp"

namespace hyperaug {

// Directed acyclic IS-A graph; an edge (child, parent) reads "child IS-A parent".
class Taxonomy {
 public:
  using Edge = std::pair<std::string, std::string>;

  Taxonomy() = default;
  // Throws ValidationError on self-edges and CycleError (naming one cycle) on
  // cycles. Repeated edges collapse.
  explicit Taxonomy(const std::vector<Edge>& edges);

  const std::set<std::string>& nodes() const { return nodes_; }
  std::size_t edge_count() const { return edge_count_; }
  bool contains(const std::string& node) const { return nodes_.count(node) > 0; }
  const std::set<std::string>& parents(const std::string& node) const;
  const std::set<std::string>& children(const std::string& node) const;

  // Transitive closure of parents, excluding the node. LookupError if unknown.
  std::set<std::string> ancestors(const std::string& node) const;
  bool is_ancestor(const std::string& descendant, const std::string& ancestor) const;
  // Children before parents.
  std::vector<std::string> topological_order() const;

 private:
  std::set<std::string> nodes_;
  std::map<std::string, std::set<std::string>> parents_;
  std::map<std::string, std::set<std::string>> children_;
  std::size_t edge_count_ = 0;
};

Taxonomy read_taxonomy(std::istream& in, const std::string& source);
Taxonomy load_taxonomy(const std::filesystem::path& path);

enum class ExtensionStrategy { closure_positives, sibling_negatives, random_negatives, reversed_negatives };

std::string to_string(ExtensionStrategy s);
ExtensionStrategy parse_extension_strategy(const std::string& s);

struct ExtensionConfig {
  ExtensionStrategy strategy = ExtensionStrategy::closure_positives;
  std::size_t max_pairs = 1;
  std::set<std::string> exclusion_tokens;
  std::uint64_t seed = 0;
};

// Appends up to max_pairs new pairs (provenance=extension) generated from the
// taxonomy around the dataset's tokens. Candidates that duplicate an existing
// key or touch an exclusion token are never emitted. Original pairs are kept
// untouched and in order.
PairDataset extend_dataset(const PairDataset& data, const Taxonomy& tax, const ExtensionConfig& config);

}  // namespace hyperaug

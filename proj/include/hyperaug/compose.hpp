#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "hyperaug/augmentation.hpp"
#include "hyperaug/nn/tensor.hpp"

namespace hyperaug {

class EmbeddingSpace;
class Taxonomy;

// An intersective modifier-noun compound such as (small, dog).
struct CompoundSpec {
  std::string modifier;
  std::string noun;

  auto operator<=>(const CompoundSpec&) const = default;
};

enum class ComposeMode { additive, mean };
enum class ComposeNegatives { none, reversed, random_noun };

std::string to_string(ComposeMode m);
ComposeMode parse_compose_mode(const std::string& s);
std::string to_string(ComposeNegatives n);
ComposeNegatives parse_compose_negatives(const std::string& s);

struct ComposeConfig {
  ComposeMode mode = ComposeMode::additive;
  std::size_t max_pairs = 1000;
  bool include_transitive = true;
  ComposeNegatives negative_strategy = ComposeNegatives::none;
  std::uint64_t seed = 0;
  // Candidates derived from any of these words are dropped before sampling.
  std::set<std::string> exclusion_tokens;
};

// additive: v_modifier + v_noun; mean: (v_modifier + v_noun) / 2.
// LookupError naming the missing token.
Vector compose(const EmbeddingSpace& space, const CompoundSpec& spec, ComposeMode mode);

// TSV "modifier<TAB>noun".
std::vector<CompoundSpec> read_compounds(std::istream& in, const std::string& source);
std::vector<CompoundSpec> load_compounds(const std::filesystem::path& path);

// Synthetic token for a composed vector.
std::string compound_token(const CompoundSpec& spec);

// Every candidate before truncation, in compound order: the positive
// (m∘n, n), then (m∘n, a) for each in-vocabulary ancestor a of n when
// include_transitive, each followed by its negative if a strategy is set.
// Compounds with an OOV member are skipped; *skipped receives the count.
AugmentationSet compose_candidates(const EmbeddingSpace& space, const std::vector<CompoundSpec>& compounds,
                                   const Taxonomy& tax, const ComposeConfig& config,
                                   std::size_t* skipped = nullptr);

// compose_candidates truncated to max_pairs by a seeded uniform sample that
// keeps candidate order. For fixed inputs and seed, smaller max_pairs yield
// subsets of larger ones.
AugmentationSet generate_compose_pairs(const EmbeddingSpace& space, const std::vector<CompoundSpec>& compounds,
                                       const Taxonomy& tax, const ComposeConfig& config);

}  // namespace hyperaug

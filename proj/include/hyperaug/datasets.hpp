#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace hyperaug {

class EmbeddingSpace;

enum class Provenance { original, extension, compose_aug, gandalf_aug };

std::string to_string(Provenance p);
Provenance parse_provenance(const std::string& s);

struct LabeledPair {
  std::string hyponym;
  std::string hypernym;
  bool positive = false;
  Provenance provenance = Provenance::original;

  bool operator==(const LabeledPair&) const = default;
};

enum class Split { train, test, unsplit };

// Ordered pair list with no duplicate (hyponym, hypernym) keys.
class PairDataset {
 public:
  PairDataset() = default;
  explicit PairDataset(std::string name, Split split = Split::unsplit)
      : name_(std::move(name)), split_(split) {}

  const std::string& name() const { return name_; }
  Split split() const { return split_; }
  const std::vector<LabeledPair>& pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  const LabeledPair& operator[](std::size_t i) const { return pairs_[i]; }

  bool contains(const std::string& hyponym, const std::string& hypernym) const;
  // Throws DuplicateError if the key is already present.
  void add(LabeledPair pair);
  // Returns false (and leaves the dataset unchanged) on a duplicate key.
  bool try_add(LabeledPair pair);

  std::size_t count_positive() const;
  // Every token appearing on either side.
  std::set<std::string> tokens() const;
  // Sub-dataset in the given index order.
  PairDataset subset(const std::vector<std::size_t>& indices) const;

 private:
  std::string name_;
  Split split_ = Split::unsplit;
  std::vector<LabeledPair> pairs_;
  std::set<std::pair<std::string, std::string>> keys_;
};

// TSV "hyponym<TAB>hypernym<TAB>label[<TAB>provenance]"; label in
// {1,0,true,false}. Blank lines are skipped.
PairDataset read_pairs(std::istream& in, const std::string& source, std::string name,
                       Split split = Split::unsplit);
PairDataset parse_pairs(const std::filesystem::path& path, std::string name = {},
                        Split split = Split::unsplit);
void write_pairs(std::ostream& out, const PairDataset& data, bool with_provenance);
void save_pairs(const std::filesystem::path& path, const PairDataset& data, bool with_provenance);

struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;  // fold of each pair

  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;
};

// Each class is shuffled with the seed and dealt round-robin across folds,
// continuing the deal position between classes so fold sizes stay balanced.
// Per fold, each class count is floor or ceil of (class size / k).
FoldPlan stratified_folds(const PairDataset& data, std::size_t k, std::uint64_t seed);
void write_fold_plan_csv(std::ostream& out, const FoldPlan& plan);

struct FilterResult {
  PairDataset dataset;
  std::size_t dropped = 0;
};

// Drops pairs with an out-of-vocabulary token.
FilterResult filter_to_vocabulary(const PairDataset& data, const EmbeddingSpace& space);

}  // namespace hyperaug

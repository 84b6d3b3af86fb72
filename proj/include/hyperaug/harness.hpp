#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hyperaug/augmentation.hpp"
#include "hyperaug/compose.hpp"
#include "hyperaug/config.hpp"
#include "hyperaug/datasets.hpp"
#include "hyperaug/embeddings.hpp"
#include "hyperaug/gandalf.hpp"
#include "hyperaug/taxonomy.hpp"

namespace hyperaug {

// Everything a config points at, loaded and filtered to the space.
struct LoadedDataset {
  DatasetSource source;
  PairDataset data;                 // in-vocabulary pairs only
  std::optional<PairDataset> test;  // split protocol
};

struct Resources {
  EmbeddingSpace space;
  std::vector<LoadedDataset> datasets;
  std::optional<Taxonomy> taxonomy;
  std::vector<CompoundSpec> compounds;
};

Resources load_resources(const ExperimentConfig& config);

// One evaluation fold: real training pairs (after train_fraction
// subsampling) and the held-out pairs.
struct FoldData {
  PairDataset train;
  PairDataset test;
  std::set<std::string> test_tokens;
};

// Folds for a dataset under the configured protocol. Fold assignment depends
// only on (seed, dataset name), never on the condition being evaluated.
std::vector<FoldData> make_folds(const ExperimentConfig& config, const LoadedDataset& dataset,
                                 std::vector<std::size_t>* assignments = nullptr);

// Entries whose real tokens (source tokens plus non-synthetic pair tokens)
// meet eval_tokens. The harness refuses to train on a set with any.
std::vector<std::size_t> audit_leakage(const AugmentationSet& set, const std::set<std::string>& eval_tokens);

// Augmentation candidates grouped by origin; `both` has a compose part and a
// gandalf part.
struct AugmentationPool {
  std::vector<AugmentationSet> parts;
  std::vector<std::uint64_t> part_seeds;
};

// Builds the pool for one fold and condition with room for max_amount pairs
// per part. Candidates touching test_tokens are never generated.
AugmentationPool build_pool(const ExperimentConfig& config, const Resources& res, const FoldData& fold,
                            Condition condition, std::size_t max_amount, std::uint64_t seed);

// `amount` pairs from every part (clamped to the part size, with a warning
// appended). For a fixed pool, smaller amounts select subsets of larger ones.
AugmentationSet take_amount(const AugmentationPool& pool, std::size_t amount, std::vector<std::string>* warnings,
                            const std::string& context);

struct ResultRow {
  std::string dataset;
  std::string space;
  std::string protocol;
  std::size_t folds = 0;
  std::string classifier;
  std::string variant;  // "full" or "hyper_only"
  std::string aggregation;
  std::string augmentation;
  std::size_t amount = 0;
  std::size_t added_pairs = 0;  // summed over folds
  double accuracy = 0.0;        // mean over folds
  double delta_vs_baseline = 0.0;
  std::uint64_t seed = 0;
};

struct FoldRecord {
  std::string dataset;
  std::size_t fold = 0;
  std::string classifier;
  std::string variant;
  std::string aggregation;
  std::string augmentation;
  std::size_t amount = 0;
  std::size_t train_pairs = 0;
  std::size_t added_pairs = 0;
  std::size_t test_pairs = 0;
  double accuracy = 0.0;
};

struct AuditRecord {
  std::string dataset;
  std::size_t fold = 0;
  std::string augmentation;
  std::size_t amount = 0;
  std::size_t pairs_checked = 0;
  std::size_t violations = 0;
};

struct MatrixResult {
  std::string config_hash;
  std::vector<ResultRow> rows;
  std::vector<FoldRecord> folds;
  std::vector<AuditRecord> audit;
  // Per dataset, the fold index of every in-vocabulary pair.
  std::map<std::string, std::vector<std::size_t>> fold_assignments;
  std::vector<std::string> warnings;
};

// One row per dataset x classifier x condition (baseline first).
MatrixResult run_matrix(const ExperimentConfig& config);

// Accuracy per amount for every configured augmentation; amount 0 is the
// baseline. Amounts must be ascending and start at 0.
MatrixResult sweep_amount(const ExperimentConfig& config, const std::vector<std::size_t>& amounts);

// The matrix for the configured aggregation ("full") and for hyper_only,
// on the same folds and seeds.
MatrixResult ablation_hyper_only(const ExperimentConfig& config);

void write_results_csv(std::ostream& out, const MatrixResult& result);
void write_folds_csv(std::ostream& out, const MatrixResult& result);
void write_audit_csv(std::ostream& out, const MatrixResult& result);
// Deltas in absolute accuracy points (x100).
void write_summary(std::ostream& out, const MatrixResult& result);

void write_neighbors_csv(std::ostream& out, const std::vector<NeighborRow>& rows, const std::string& config_hash);

}  // namespace hyperaug

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyperaug/compose.hpp"
#include "hyperaug/features.hpp"
#include "hyperaug/feedforward.hpp"
#include "hyperaug/gandalf.hpp"
#include "hyperaug/taxonomy.hpp"

namespace hyperaug {

enum class ClassifierKind { lr, ff };
std::string to_string(ClassifierKind k);
ClassifierKind parse_classifier(const std::string& s);

// Experiment conditions. `extend` adds taxonomy-extension pairs; `both` adds
// the configured amount from compose and from gandalf each.
enum class Condition { none, compose, gandalf, both, extend };
std::string to_string(Condition c);
Condition parse_condition(const std::string& s);

enum class ProtocolKind { cv, split };
std::string to_string(ProtocolKind p);

struct DatasetSource {
  std::string name;
  std::filesystem::path path;
  std::optional<std::filesystem::path> test_path;
};

struct TuningConfig {
  bool enabled = false;
  // false: one joint grid; true: architecture first with the configured
  // aggregation, then aggregation with the winning architecture.
  bool staged = false;
  std::size_t folds = 10;
  std::vector<std::array<std::size_t, 3>> hidden;
  std::vector<nn::ActivationKind> activations;
  std::vector<double> dropouts;
  std::vector<AggregationKind> aggregations;
};

struct LrSettings {
  std::optional<double> l2_strength;  // unset: 1 / n_train
  double tol = 1e-6;
  std::size_t max_iter = 1000;
};

struct ExperimentConfig {
  std::filesystem::path space_path;
  std::string space_name;
  std::vector<DatasetSource> datasets;
  std::optional<std::filesystem::path> taxonomy_path;
  std::optional<std::filesystem::path> compounds_path;
  std::vector<ClassifierKind> classifiers;
  AggregationKind aggregation = AggregationKind::concat_asym;
  std::vector<Condition> conditions;
  std::size_t augmentation_amount = 0;
  ProtocolKind protocol = ProtocolKind::cv;
  std::size_t folds = 10;
  double train_fraction = 1.0;
  ExtensionStrategy extension_strategy = ExtensionStrategy::closure_positives;
  FeedforwardSpec ff;
  TrainSpec train;
  LrSettings lr;
  ComposeMode compose_mode = ComposeMode::additive;
  bool compose_include_transitive = true;
  ComposeNegatives compose_negatives = ComposeNegatives::none;
  GanConfig gan;
  TuningConfig tuning;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::filesystem::path output_dir;

  // The fully resolved JSON document the struct was built from.
  nlohmann::json document;
  // FNV-1a of the canonical document without output_dir and threads, as 16
  // hex digits. Neither of those changes any result.
  std::string hash;
};

// Every key with its default value.
nlohmann::json default_config_document();

// Overlays `user` on the defaults (objects merge key by key, anything else
// replaces) and builds the config. Unknown keys, wrong types and violated
// invariants throw ConfigError. Relative paths resolve against base_dir.
ExperimentConfig build_config(const nlohmann::json& user, const std::filesystem::path& base_dir = {});

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

// Applies "a.b.c=value" to a document. The value is parsed as JSON when it
// parses, otherwise taken as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

}  // namespace hyperaug

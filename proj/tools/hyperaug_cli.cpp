#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "hyperaug/errors.hpp"
#include "hyperaug/harness.hpp"
#include "hyperaug/synthetic.hpp"

namespace fs = std::filesystem;
using namespace hyperaug;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> sets;
  std::optional<std::size_t> threads;
  bool verbose = false;
};

void add_common(CLI::App* cmd, Common& c, bool needs_config = true) {
  auto* opt = cmd->add_option("--config", c.config, "JSON experiment config");
  if (needs_config) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "override the config seed");
  cmd->add_option("--out", c.out, "output directory (overrides output_dir)");
  cmd->add_option("--set", c.sets, "override a config key, e.g. --set ff.epochs=10")->take_all();
  cmd->add_option("--threads", c.threads, "worker threads");
  cmd->add_flag("-v,--verbose", c.verbose, "info-level logging");
}

ExperimentConfig resolve_config(const Common& c) {
  auto overrides = c.sets;
  if (c.seed) overrides.push_back(fmt::format("seed={}", *c.seed));
  if (c.threads) overrides.push_back(fmt::format("threads={}", *c.threads));
  auto config = load_config(c.config, overrides);
  if (!c.out.empty()) config.output_dir = fs::absolute(c.out);
  fs::create_directories(config.output_dir);
  return config;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

template <class Writer>
void write_file(const fs::path& path, Writer&& w) {
  auto out = open_out(path);
  w(out);
  if (!out) throw IoError("write failed for " + path.string());
  spdlog::info("wrote {}", path.string());
}

void write_matrix_outputs(const ExperimentConfig& c, const MatrixResult& r, const std::string& table) {
  const auto& dir = c.output_dir;
  write_file(dir / (table + ".csv"), [&](std::ostream& o) { write_results_csv(o, r); });
  write_file(dir / "folds.csv", [&](std::ostream& o) { write_folds_csv(o, r); });
  write_file(dir / "audit.csv", [&](std::ostream& o) { write_audit_csv(o, r); });
  write_file(dir / "summary.txt", [&](std::ostream& o) { write_summary(o, r); });
  write_file(dir / "config.resolved.json", [&](std::ostream& o) { o << c.document.dump(2) << '\n'; });
  write_summary(std::cout, r);
}

std::set<std::string> tokens_of(const std::string& tsv) {
  if (tsv.empty()) return {};
  return parse_pairs(tsv).tokens();
}

int run_augment_compose(const Common& common, std::optional<std::size_t> max_pairs, const std::string& exclude) {
  const auto c = resolve_config(common);
  const auto res = load_resources(c);
  if (!res.taxonomy || res.compounds.empty()) {
    throw ConfigError("augment-compose needs taxonomy_path and a non-empty compounds_path");
  }
  ComposeConfig cc;
  cc.mode = c.compose_mode;
  cc.include_transitive = c.compose_include_transitive;
  cc.negative_strategy = c.compose_negatives;
  cc.seed = c.seed;
  cc.exclusion_tokens = tokens_of(exclude);
  std::size_t skipped = 0;
  const auto all = compose_candidates(res.space, res.compounds, *res.taxonomy, cc, &skipped);
  cc.max_pairs = max_pairs.value_or(c.augmentation_amount > 0 ? c.augmentation_amount : all.size());
  const auto set = generate_compose_pairs(res.space, res.compounds, *res.taxonomy, cc);
  save_augmentation(c.output_dir / "compose", set);
  fmt::print("compose: {} pair(s) from {} candidate(s), {} compound(s) skipped as out of vocabulary\n", set.size(),
             all.size(), skipped);
  return 0;
}

int run_augment_gandalf(const Common& common, std::size_t per_anchor, const std::string& exclude) {
  const auto c = resolve_config(common);
  const auto res = load_resources(c);
  const auto excluded = tokens_of(exclude);
  std::vector<VectorPair> positives;
  std::set<std::string> anchor_tokens;
  for (const auto& d : res.datasets) {
    for (const auto& p : d.data.pairs()) {
      if (!p.positive || excluded.count(p.hyponym) || excluded.count(p.hypernym)) continue;
      positives.push_back({res.space.at(p.hyponym), res.space.at(p.hypernym), true});
      anchor_tokens.insert(p.hyponym);
    }
  }
  GanConfig gc = c.gan;
  gc.seed = c.seed;
  auto model = gan_train(positives, gc);
  save_generator(c.output_dir / "generator.txt", model.generator);
  write_file(c.output_dir / "gan_log.csv", [&](std::ostream& o) {
    o << "config_hash,step,d_loss,g_loss,d_real_acc,d_fake_acc\n";
    for (std::size_t s = 0; s < model.log.size(); ++s) {
      const auto& l = model.log[s];
      o << fmt::format("{},{},{},{},{},{}\n", c.hash, s, l.d_loss, l.g_loss, l.d_real_acc, l.d_fake_acc);
    }
  });
  AugmentationSet set;
  if (gc.mode == GanMode::conditional) {
    std::vector<Anchor> anchors;
    for (const auto& t : anchor_tokens) anchors.push_back({t, res.space.at(t)});
    set = gan_sample(model.generator, anchors, per_anchor, derive_seed(c.seed, {1}));
  } else {
    set = gan_sample_unconditional(model.generator, per_anchor * anchor_tokens.size(), derive_seed(c.seed, {1}));
  }
  save_augmentation(c.output_dir / "gandalf", set);
  fmt::print("gandalf: trained {} step(s) on {} positive pair(s), sampled {} pair(s)\n", gc.steps,
             positives.size(), set.size());
  return 0;
}

int run_extend(const Common& common, std::optional<std::size_t> max_pairs, const std::string& exclude) {
  const auto c = resolve_config(common);
  const auto res = load_resources(c);
  if (!res.taxonomy) throw ConfigError("extend needs taxonomy_path");
  for (const auto& d : res.datasets) {
    ExtensionConfig ec{c.extension_strategy, max_pairs.value_or(c.augmentation_amount), tokens_of(exclude),
                       derive_seed(c.seed, {hash_string(d.source.name)})};
    const auto extended = extend_dataset(d.data, *res.taxonomy, ec);
    save_pairs(c.output_dir / (d.source.name + ".extended.tsv"), extended, true);
    fmt::print("{}: {} original + {} extension pair(s)\n", d.source.name, d.data.size(),
               extended.size() - d.data.size());
  }
  return 0;
}

int run_neighbors(const Common& common, const std::string& aug_stem, std::size_t k) {
  const auto c = resolve_config(common);
  const auto space = load_space(c.space_path, c.space_name);
  const auto aug = load_augmentation(aug_stem, space);
  const auto rows = neighbor_report(space, aug, k);
  write_file(c.output_dir / "neighbors.csv", [&](std::ostream& o) { write_neighbors_csv(o, rows, c.hash); });
  fmt::print("neighbors: {} synthetic token(s), k={}\n", rows.size(), k);
  return 0;
}

int run_make_synthetic(const Common& common, std::size_t dim) {
  SyntheticWorldConfig wc;
  wc.dim = dim;
  wc.seed = common.seed.value_or(0);
  const fs::path dir = fs::absolute(common.out.empty() ? fs::path("synthetic") : fs::path(common.out));
  fs::create_directories(dir);
  const auto world = make_synthetic_world(wc);
  save_synthetic_world(dir, world);
  nlohmann::json doc = {
      {"space", {{"path", "space.txt"}, {"name", "synthetic"}}},
      {"datasets", {{{"name", "synthetic"}, {"path", "pairs.tsv"}, {"test_path", "test.tsv"}}}},
      {"taxonomy_path", "taxonomy.tsv"},
      {"compounds_path", "compounds.tsv"},
      {"classifiers", {"lr", "ff"}},
      {"augmentations", {"none", "compose", "extend"}},
      {"augmentation_amount", 200},
      {"protocol", {{"kind", "split"}}},
      {"train_fraction", 0.2},
      {"ff", {{"hidden", {8, 8, 8}}, {"activation", "tanh"}, {"batch_size", 16}}},
      {"compose", {{"negative_strategy", "reversed"}}},
      {"seed", wc.seed},
      {"output_dir", "results"}};
  write_file(dir / "config.json", [&](std::ostream& o) { o << doc.dump(2) << '\n'; });
  fmt::print("synthetic world: {} words, {} training pairs, {} test pairs, {} compounds in {}\n", world.space.size(),
             world.dataset.size(), world.test.size(), world.compounds.size(), dir.string());
  return 0;
}

std::string quoted(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch == '\n' ? ' ' : ch;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hypernymy detection with data augmentation"};
  app.require_subcommand(1);

  Common common;
  std::vector<std::size_t> amounts;
  std::optional<std::size_t> max_pairs;
  std::string exclude;
  std::size_t per_anchor = 1;
  std::string aug_stem;
  std::size_t k = 5;
  std::size_t dim = 16;

  auto* matrix = app.add_subcommand("run-matrix", "dataset x classifier x augmentation table");
  add_common(matrix, common);
  auto* sweep = app.add_subcommand("sweep-amount", "accuracy against augmentation amount");
  add_common(sweep, common);
  sweep->add_option("--amounts", amounts, "ascending amounts starting at 0")->delimiter(',')->required();
  auto* ablate = app.add_subcommand("ablate-hyper-only", "full model against hypernym-only features");
  add_common(ablate, common);
  auto* compose = app.add_subcommand("augment-compose", "write compositional augmentation pairs");
  add_common(compose, common);
  compose->add_option("--max-pairs", max_pairs, "cap on emitted pairs");
  compose->add_option("--exclude", exclude, "dataset TSV whose tokens are kept out");
  auto* gandalf = app.add_subcommand("augment-gandalf", "train a generator and sample pairs");
  add_common(gandalf, common);
  gandalf->add_option("--per-anchor", per_anchor, "samples per anchor hyponym");
  gandalf->add_option("--exclude", exclude, "dataset TSV whose pairs are not trained on");
  auto* extend = app.add_subcommand("extend", "extend datasets from the taxonomy");
  add_common(extend, common);
  extend->add_option("--max-pairs", max_pairs, "cap on new pairs per dataset");
  extend->add_option("--exclude", exclude, "dataset TSV whose tokens are kept out");
  auto* neighbors = app.add_subcommand("neighbors", "nearest real words of synthetic vectors");
  add_common(neighbors, common);
  neighbors->add_option("--aug", aug_stem, "augmentation stem (<stem>.vectors.txt, <stem>.pairs.tsv)")->required();
  neighbors->add_option("--k", k, "neighbours per token")->check(CLI::PositiveNumber);
  auto* synth = app.add_subcommand("make-synthetic", "write a synthetic corpus and a matching config");
  add_common(synth, common, false);
  synth->add_option("--dim", dim, "embedding dimension")->check(CLI::Range(4, 4096));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: kind=usage message=\"%s\"\n", quoted(e.what()).c_str());
    return 2;
  }

  spdlog::set_default_logger(spdlog::stderr_logger_mt("hyperaug"));
  spdlog::set_level(common.verbose ? spdlog::level::info : spdlog::level::warn);

  try {
    if (*matrix) {
      const auto c = resolve_config(common);
      write_matrix_outputs(c, run_matrix(c), "results");
    } else if (*sweep) {
      const auto c = resolve_config(common);
      write_matrix_outputs(c, sweep_amount(c, amounts), "sweep");
    } else if (*ablate) {
      const auto c = resolve_config(common);
      write_matrix_outputs(c, ablation_hyper_only(c), "ablation");
    } else if (*compose) {
      return run_augment_compose(common, max_pairs, exclude);
    } else if (*gandalf) {
      return run_augment_gandalf(common, per_anchor, exclude);
    } else if (*extend) {
      return run_extend(common, max_pairs, exclude);
    } else if (*neighbors) {
      return run_neighbors(common, aug_stem, k);
    } else if (*synth) {
      return run_make_synthetic(common, dim);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: kind=%s message=\"%s\"\n", e.kind().c_str(), quoted(e.what()).c_str());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: kind=internal message=\"%s\"\n", quoted(e.what()).c_str());
    return 1;
  }
  return 0;
}

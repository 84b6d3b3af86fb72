#include "hyperaug/harness.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "hyperaug/classifiers.hpp"
#include "hyperaug/errors.hpp"
#include "hyperaug/features.hpp"
#include "hyperaug/logistic.hpp"
#include "hyperaug/parallel.hpp"
#include "hyperaug/random.hpp"

namespace hyperaug {

namespace {

// Seed streams below the per-dataset seed.
enum Stream : std::uint64_t { kFolds = 1, kSubsample = 2, kPool = 3, kModel = 4, kTuning = 5 };
// Pool parts, shared between `both` and the single conditions.
enum Part : std::uint64_t { kComposePart = 1, kGandalfPart = 2, kExtendPart = 3 };

std::uint64_t dataset_seed(const ExperimentConfig& c, const std::string& name) {
  return derive_seed(c.seed, {hash_string(name)});
}

std::string cell_name(const std::string& dataset, std::size_t fold, Condition c) {
  return fmt::format("dataset '{}' fold {} augmentation {}", dataset, fold, to_string(c));
}

// Keeps the error kind, prefixes the offending cell.
template <class F>
auto in_cell(const std::string& cell, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), cell + ": " + e.what());
  }
}

PairDataset stratified_subsample(const PairDataset& data, double fraction, std::uint64_t seed) {
  if (fraction >= 1.0) return data;
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < data.size(); ++i) (data[i].positive ? pos : neg).push_back(i);
  std::vector<std::size_t> keep;
  std::uint64_t cls = 0;
  for (const auto* group : {&pos, &neg}) {
    if (group->empty()) continue;
    const auto take = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(fraction * static_cast<double>(group->size()))), 1, group->size());
    for (auto i : sample_indices(group->size(), take, derive_seed(seed, {cls}))) keep.push_back((*group)[i]);
    ++cls;
  }
  std::sort(keep.begin(), keep.end());
  return data.subset(keep);
}

AugmentationSet compose_part(const ExperimentConfig& c, const Resources& res, const FoldData& fold,
                             std::size_t max_amount, std::uint64_t seed) {
  if (max_amount == 0) return AugmentationSet(res.space.dim());
  ComposeConfig cc;
  cc.mode = c.compose_mode;
  cc.max_pairs = max_amount;
  cc.include_transitive = c.compose_include_transitive;
  cc.negative_strategy = c.compose_negatives;
  cc.seed = seed;
  cc.exclusion_tokens = fold.test_tokens;
  return generate_compose_pairs(res.space, res.compounds, *res.taxonomy, cc);
}

AugmentationSet gandalf_part(const ExperimentConfig& c, const Resources& res, const FoldData& fold,
                             std::size_t max_amount, std::uint64_t seed) {
  AugmentationSet out(res.space.dim());
  if (max_amount == 0) return out;
  std::vector<VectorPair> positives;
  std::set<std::string> anchor_tokens;
  for (const auto& p : fold.train.pairs()) {
    if (!p.positive) continue;
    positives.push_back({res.space.at(p.hyponym), res.space.at(p.hypernym), true});
    if (!fold.test_tokens.count(p.hyponym)) anchor_tokens.insert(p.hyponym);
  }
  if (anchor_tokens.empty()) {
    spdlog::warn("gandalf: no training hyponym outside the evaluation fold; nothing to anchor on");
    return out;
  }
  GanConfig gc = c.gan;
  gc.seed = derive_seed(seed, {0});
  auto model = gan_train(positives, gc);
  std::vector<Anchor> anchors;
  for (const auto& t : anchor_tokens) anchors.push_back({t, res.space.at(t)});
  const std::size_t per_anchor = (max_amount + anchors.size() - 1) / anchors.size();
  auto sampled = gan_sample(model.generator, anchors, per_anchor, derive_seed(seed, {1}));
  if (sampled.size() <= max_amount) return sampled;
  return sampled.select(sample_indices(sampled.size(), max_amount, derive_seed(seed, {2})));
}

AugmentationSet extend_part(const ExperimentConfig& c, const Resources& res, const FoldData& fold,
                            std::size_t max_amount, std::uint64_t seed) {
  AugmentationSet out(res.space.dim());
  if (max_amount == 0) return out;
  ExtensionConfig ec{c.extension_strategy, max_amount, fold.test_tokens, seed};
  const auto extended = extend_dataset(fold.train, *res.taxonomy, ec);
  std::size_t oov = 0;
  for (std::size_t i = fold.train.size(); i < extended.size(); ++i) {
    const auto& p = extended[i];
    const auto hypo = res.space.lookup(p.hyponym);
    const auto hyper = res.space.lookup(p.hypernym);
    if (!hypo || !hyper) {
      ++oov;
      continue;
    }
    out.add({p.hyponym, p.hypernym, *hypo, *hyper, p.positive, Provenance::extension, false, false,
             {p.hyponym, p.hypernym}});
  }
  if (oov > 0) spdlog::info("extend: skipped {} out-of-vocabulary pair(s)", oov);
  return out;
}

struct Variant {
  std::string name;
  std::optional<AggregationKind> aggregation;  // unset: configured or tuned
};

struct Job {
  std::size_t dataset;
  std::size_t fold;
  Condition condition;
  std::vector<std::size_t> amounts;
};

struct JobOutput {
  std::vector<FoldRecord> folds;
  std::vector<AuditRecord> audit;
  std::vector<std::string> warnings;
};

double train_and_score(const ExperimentConfig& c, ClassifierKind kind, const FeedforwardSpec& spec,
                       const std::vector<VectorPair>& train, const std::vector<VectorPair>& test,
                       std::uint64_t model_seed) {
  if (kind == ClassifierKind::ff) {
    TrainSpec t = c.train;
    t.seed = model_seed;
    return evaluate(ff_fit(spec, t, train).model, test);
  }
  const double l2 = c.lr.l2_strength.value_or(default_l2_strength(train.size()));
  const auto fit = lr_fit(featurize(spec.aggregation, train), labels_of(train), l2, c.lr.tol, c.lr.max_iter);
  if (!fit.converged) spdlog::debug("lr: stopped after {} iterations without reaching tol", fit.iterations);
  return evaluate(fit.model, spec.aggregation, test);
}

FeedforwardSpec tune(const ExperimentConfig& c, const Resources& res, const FoldData& fold, std::uint64_t seed) {
  const auto& t = c.tuning;
  TrainSpec train = c.train;
  if (!t.staged) {
    const auto grid = expand_grid(t.hidden, t.activations, t.dropouts, t.aggregations);
    return grid_search(fold.train, res.space, grid, train, t.folds, seed).best;
  }
  const auto arch = grid_search(fold.train, res.space, expand_grid(t.hidden, t.activations, t.dropouts, {c.aggregation}),
                                train, t.folds, seed)
                        .best;
  std::vector<FeedforwardSpec> second;
  for (auto a : t.aggregations) {
    auto s = arch;
    s.aggregation = a;
    second.push_back(s);
  }
  return grid_search(fold.train, res.space, second, train, t.folds, derive_seed(seed, {1})).best;
}

MatrixResult run_engine(const ExperimentConfig& c, const std::vector<Condition>& conditions,
                        const std::vector<std::size_t>& amounts, const std::vector<Variant>& variants) {
  const Resources res = load_resources(c);
  MatrixResult result;
  result.config_hash = c.hash;

  std::vector<std::vector<FoldData>> folds;
  for (const auto& d : res.datasets) {
    std::vector<std::size_t> assignments;
    folds.push_back(in_cell("dataset '" + d.source.name + "'", [&] { return make_folds(c, d, &assignments); }));
    result.fold_assignments[d.source.name] = std::move(assignments);
  }

  // Per (dataset, fold) feed-forward spec, tuned on that fold's training part.
  std::vector<std::pair<std::size_t, std::size_t>> fold_ids;
  for (std::size_t d = 0; d < folds.size(); ++d) {
    for (std::size_t f = 0; f < folds[d].size(); ++f) fold_ids.emplace_back(d, f);
  }
  std::vector<FeedforwardSpec> specs(fold_ids.size(), c.ff);
  const bool tune_ff = c.tuning.enabled &&
                       std::find(c.classifiers.begin(), c.classifiers.end(), ClassifierKind::ff) != c.classifiers.end();
  if (tune_ff) {
    parallel_for(fold_ids.size(), c.threads, [&](std::size_t i) {
      const auto [d, f] = fold_ids[i];
      const auto& name = res.datasets[d].source.name;
      specs[i] = in_cell(fmt::format("dataset '{}' fold {} tuning", name, f), [&] {
        return tune(c, res, folds[d][f], derive_seed(dataset_seed(c, name), {kTuning, f}));
      });
      spdlog::info("{} fold {}: tuned spec {}", name, f, specs[i].label());
    });
  }
  auto spec_for = [&](std::size_t d, std::size_t f) {
    for (std::size_t i = 0; i < fold_ids.size(); ++i) {
      if (fold_ids[i] == std::pair(d, f)) return specs[i];
    }
    return c.ff;
  };

  std::vector<Job> jobs;
  for (std::size_t d = 0; d < folds.size(); ++d) {
    for (std::size_t f = 0; f < folds[d].size(); ++f) {
      for (auto cond : conditions) {
        std::vector<std::size_t> a;
        if (cond == Condition::none) {
          a = {0};
        } else {
          for (auto x : amounts) {
            if (x > 0) a.push_back(x);
          }
          if (a.empty()) continue;
        }
        jobs.push_back({d, f, cond, a});
      }
    }
  }

  std::vector<JobOutput> outputs(jobs.size());
  parallel_for(jobs.size(), c.threads, [&](std::size_t j) {
    const Job& job = jobs[j];
    const auto& name = res.datasets[job.dataset].source.name;
    const FoldData& fold = folds[job.dataset][job.fold];
    const std::string cell = cell_name(name, job.fold, job.condition);
    in_cell(cell, [&] {
      JobOutput& out = outputs[j];
      const std::uint64_t ds = dataset_seed(c, name);
      const auto pool = build_pool(c, res, fold, job.condition, job.amounts.back(),
                                   derive_seed(ds, {kPool, job.fold}));
      const auto real_train = to_vector_pairs(fold.train, res.space);
      const auto test = to_vector_pairs(fold.test, res.space);
      const std::uint64_t model_seed = derive_seed(ds, {kModel, job.fold});
      const FeedforwardSpec base_spec = spec_for(job.dataset, job.fold);
      for (auto amount : job.amounts) {
        const auto aug = take_amount(pool, amount, &out.warnings, cell);
        const auto leaks = audit_leakage(aug, fold.test_tokens);
        out.audit.push_back({name, job.fold, to_string(job.condition), amount, aug.size(), leaks.size()});
        if (!leaks.empty()) {
          throw ValidationError(fmt::format("leakage audit: {} augmentation pair(s) touch evaluation tokens, "
                                            "first is ({}, {})",
                                            leaks.size(), aug[leaks[0]].hypo_token, aug[leaks[0]].hyper_token));
        }
        auto train = real_train;
        const auto extra = aug.vector_pairs();
        train.insert(train.end(), extra.begin(), extra.end());
        for (auto kind : c.classifiers) {
          for (const auto& v : variants) {
            FeedforwardSpec spec = base_spec;
            spec.aggregation = v.aggregation.value_or(tune_ff ? base_spec.aggregation : c.aggregation);
            const double acc = train_and_score(c, kind, spec, train, test, model_seed);
            out.folds.push_back({name, job.fold, to_string(kind), v.name, to_string(spec.aggregation),
                                 to_string(job.condition), amount, real_train.size(), aug.size(), test.size(), acc});
          }
        }
      }
      return 0;
    });
  });

  for (auto& o : outputs) {
    result.folds.insert(result.folds.end(), o.folds.begin(), o.folds.end());
    result.audit.insert(result.audit.end(), o.audit.begin(), o.audit.end());
    for (auto& w : o.warnings) {
      spdlog::warn("{}", w);
      result.warnings.push_back(std::move(w));
    }
  }

  // Fold records -> rows, in config order.
  for (std::size_t d = 0; d < res.datasets.size(); ++d) {
    const auto& name = res.datasets[d].source.name;
    for (auto kind : c.classifiers) {
      for (const auto& v : variants) {
        std::optional<double> baseline;
        for (auto cond : conditions) {
          std::vector<std::size_t> row_amounts{0};
          if (cond != Condition::none) {
            row_amounts.clear();
            for (auto x : amounts) {
              if (x > 0) row_amounts.push_back(x);
            }
          }
          for (auto amount : row_amounts) {
            ResultRow row{name, c.space_name, to_string(c.protocol), folds[d].size(), to_string(kind), v.name,
                          "", to_string(cond), amount, 0, 0.0, 0.0, c.seed};
            std::size_t n = 0;
            for (const auto& r : result.folds) {
              if (r.dataset != name || r.classifier != row.classifier || r.variant != v.name ||
                  r.augmentation != row.augmentation || r.amount != amount) {
                continue;
              }
              row.accuracy += r.accuracy;
              row.added_pairs += r.added_pairs;
              if (row.aggregation.empty()) {
                row.aggregation = r.aggregation;
              } else if (row.aggregation != r.aggregation) {
                row.aggregation = "tuned";
              }
              ++n;
            }
            if (n == 0) continue;
            row.accuracy /= static_cast<double>(n);
            if (cond == Condition::none) baseline = row.accuracy;
            row.delta_vs_baseline = baseline ? row.accuracy - *baseline : 0.0;
            result.rows.push_back(std::move(row));
          }
        }
      }
    }
  }
  return result;
}

std::string num(double x) { return fmt::format("{}", x); }

}  // namespace

Resources load_resources(const ExperimentConfig& c) {
  Resources res{load_space(c.space_path), {}, std::nullopt, {}};
  if (!c.space_name.empty()) res.space = EmbeddingSpace(res.space.vocab(), res.space.vectors(), c.space_name);
  for (const auto& src : c.datasets) {
    LoadedDataset d{src, PairDataset(src.name), std::nullopt};
    auto kept = filter_to_vocabulary(parse_pairs(src.path, src.name), res.space);
    if (kept.dropped > 0) spdlog::info("{}: dropped {} out-of-vocabulary pair(s)", src.name, kept.dropped);
    d.data = std::move(kept.dataset);
    if (src.test_path) {
      auto test = filter_to_vocabulary(parse_pairs(*src.test_path, src.name + "-test"), res.space);
      if (test.dropped > 0) spdlog::info("{} test: dropped {} out-of-vocabulary pair(s)", src.name, test.dropped);
      d.test = std::move(test.dataset);
    }
    res.datasets.push_back(std::move(d));
  }
  if (c.taxonomy_path) res.taxonomy = load_taxonomy(*c.taxonomy_path);
  if (c.compounds_path) res.compounds = load_compounds(*c.compounds_path);
  return res;
}

std::vector<FoldData> make_folds(const ExperimentConfig& c, const LoadedDataset& d,
                                 std::vector<std::size_t>* assignments) {
  const std::uint64_t ds = dataset_seed(c, d.source.name);
  std::vector<FoldData> out;
  if (c.protocol == ProtocolKind::split) {
    if (!d.test || d.test->empty()) throw DataError("no in-vocabulary test pairs");
    FoldData f{stratified_subsample(d.data, c.train_fraction, derive_seed(ds, {kSubsample, 0})), *d.test,
               d.test->tokens()};
    out.push_back(std::move(f));
    if (assignments) assignments->assign(d.data.size(), 0);
    return out;
  }
  const auto plan = stratified_folds(d.data, c.folds, derive_seed(ds, {kFolds}));
  if (assignments) *assignments = plan.assignments;
  for (std::size_t f = 0; f < plan.k; ++f) {
    const auto train = d.data.subset(plan.train_indices(f));
    auto test = d.data.subset(plan.test_indices(f));
    auto tokens = test.tokens();
    out.push_back({stratified_subsample(train, c.train_fraction, derive_seed(ds, {kSubsample, f})), std::move(test),
                   std::move(tokens)});
  }
  return out;
}

std::vector<std::size_t> audit_leakage(const AugmentationSet& set, const std::set<std::string>& eval_tokens) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& e = set[i];
    std::set<std::string> tokens = e.source_tokens;
    if (!e.hypo_synthetic) tokens.insert(e.hypo_token);
    if (!e.hyper_synthetic) tokens.insert(e.hyper_token);
    for (const auto& t : tokens) {
      if (eval_tokens.count(t)) {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

AugmentationPool build_pool(const ExperimentConfig& c, const Resources& res, const FoldData& fold,
                            Condition condition, std::size_t max_amount, std::uint64_t seed) {
  AugmentationPool pool;
  auto add = [&](Part part, auto&& make) {
    const auto s = derive_seed(seed, {part});
    pool.parts.push_back(make(c, res, fold, max_amount, s));
    pool.part_seeds.push_back(derive_seed(s, {99}));
  };
  switch (condition) {
    case Condition::none: break;
    case Condition::compose: add(kComposePart, compose_part); break;
    case Condition::gandalf: add(kGandalfPart, gandalf_part); break;
    case Condition::both:
      add(kComposePart, compose_part);
      add(kGandalfPart, gandalf_part);
      break;
    case Condition::extend: add(kExtendPart, extend_part); break;
  }
  return pool;
}

AugmentationSet take_amount(const AugmentationPool& pool, std::size_t amount, std::vector<std::string>* warnings,
                            const std::string& context) {
  AugmentationSet out(pool.parts.empty() ? 0 : pool.parts.front().dim());
  for (std::size_t p = 0; p < pool.parts.size(); ++p) {
    const auto& part = pool.parts[p];
    std::size_t take = amount;
    if (take > part.size()) {
      if (warnings) {
        warnings->push_back(fmt::format("{}: amount {} clamped to {} available candidate(s)", context, amount,
                                        part.size()));
      }
      take = part.size();
    }
    const auto chosen = part.select(sample_indices(part.size(), take, pool.part_seeds[p]));
    for (const auto& e : chosen.entries()) out.add(e);
  }
  return out;
}

MatrixResult run_matrix(const ExperimentConfig& config) {
  return run_engine(config, config.conditions, {config.augmentation_amount}, {{"full", std::nullopt}});
}

MatrixResult sweep_amount(const ExperimentConfig& config, const std::vector<std::size_t>& amounts) {
  if (amounts.empty() || amounts.front() != 0) throw ConfigError("sweep amounts must start at 0 (the baseline)");
  if (!std::is_sorted(amounts.begin(), amounts.end()) ||
      std::adjacent_find(amounts.begin(), amounts.end()) != amounts.end()) {
    throw ConfigError("sweep amounts must be strictly ascending");
  }
  return run_engine(config, config.conditions, amounts, {{"full", std::nullopt}});
}

MatrixResult ablation_hyper_only(const ExperimentConfig& config) {
  return run_engine(config, config.conditions, {config.augmentation_amount},
                    {{"full", std::nullopt}, {"hyper_only", AggregationKind::hyper_only}});
}

void write_results_csv(std::ostream& out, const MatrixResult& r) {
  out << "config_hash,dataset,space,protocol,folds,classifier,variant,aggregation,augmentation,amount,added_pairs,"
         "accuracy,delta_vs_baseline,seed\n";
  for (const auto& row : r.rows) {
    out << r.config_hash << ',' << row.dataset << ',' << row.space << ',' << row.protocol << ',' << row.folds << ','
        << row.classifier << ',' << row.variant << ',' << row.aggregation << ',' << row.augmentation << ','
        << row.amount << ',' << row.added_pairs << ',' << num(row.accuracy) << ',' << num(row.delta_vs_baseline)
        << ',' << row.seed << '\n';
  }
}

void write_folds_csv(std::ostream& out, const MatrixResult& r) {
  out << "config_hash,dataset,fold,classifier,variant,aggregation,augmentation,amount,train_pairs,added_pairs,"
         "test_pairs,accuracy\n";
  for (const auto& f : r.folds) {
    out << r.config_hash << ',' << f.dataset << ',' << f.fold << ',' << f.classifier << ',' << f.variant << ','
        << f.aggregation << ',' << f.augmentation << ',' << f.amount << ',' << f.train_pairs << ',' << f.added_pairs
        << ',' << f.test_pairs << ',' << num(f.accuracy) << '\n';
  }
}

void write_audit_csv(std::ostream& out, const MatrixResult& r) {
  out << "config_hash,dataset,fold,augmentation,amount,pairs_checked,violations\n";
  for (const auto& a : r.audit) {
    out << r.config_hash << ',' << a.dataset << ',' << a.fold << ',' << a.augmentation << ',' << a.amount << ','
        << a.pairs_checked << ',' << a.violations << '\n';
  }
}

void write_summary(std::ostream& out, const MatrixResult& r) {
  out << "config " << r.config_hash << '\n';
  for (const auto& row : r.rows) {
    out << fmt::format("{:<16} {:<3} {:<10} {:<8} amount {:>6}  accuracy {:6.2f}", row.dataset, row.classifier,
                       row.variant, row.augmentation, row.amount, 100.0 * row.accuracy);
    if (row.augmentation != "none") out << fmt::format("  delta {:+6.2f} points", 100.0 * row.delta_vs_baseline);
    out << '\n';
  }
  std::size_t violations = 0;
  for (const auto& a : r.audit) violations += a.violations;
  out << "leakage audit: " << r.audit.size() << " set(s) checked, " << violations << " violation(s)\n";
  for (const auto& w : r.warnings) out << "warning: " << w << '\n';
}

void write_neighbors_csv(std::ostream& out, const std::vector<NeighborRow>& rows, const std::string& config_hash) {
  out << "config_hash,synthetic_token,rank,neighbor,cosine\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.neighbors.size(); ++i) {
      out << config_hash << ',' << row.synthetic_token << ',' << i + 1 << ',' << row.neighbors[i].token << ','
          << num(row.neighbors[i].cosine) << '\n';
    }
  }
}

}  // namespace hyperaug

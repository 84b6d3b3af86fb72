#include "hyperaug/compose.hpp"

#include <fstream>
#include <istream>
#include <map>

#include <spdlog/spdlog.h>

#include "hyperaug/embeddings.hpp"
#include "hyperaug/errors.hpp"
#include "hyperaug/random.hpp"
#include "hyperaug/taxonomy.hpp"

namespace hyperaug {

std::string to_string(ComposeMode m) { return m == ComposeMode::additive ? "additive" : "mean"; }

ComposeMode parse_compose_mode(const std::string& s) {
  if (s == "additive") return ComposeMode::additive;
  if (s == "mean") return ComposeMode::mean;
  throw ConfigError("unknown compose mode '" + s + "'");
}

std::string to_string(ComposeNegatives n) {
  switch (n) {
    case ComposeNegatives::none: return "none";
    case ComposeNegatives::reversed: return "reversed";
    case ComposeNegatives::random_noun: return "random_noun";
  }
  return "?";
}

ComposeNegatives parse_compose_negatives(const std::string& s) {
  if (s == "none") return ComposeNegatives::none;
  if (s == "reversed") return ComposeNegatives::reversed;
  if (s == "random_noun") return ComposeNegatives::random_noun;
  throw ConfigError("unknown compose negative strategy '" + s + "'");
}

Vector compose(const EmbeddingSpace& space, const CompoundSpec& spec, ComposeMode mode) {
  const Vector m = space.at(spec.modifier);
  const Vector n = space.at(spec.noun);
  if (mode == ComposeMode::mean) return (m + n) / 2.0;
  return m + n;
}

std::vector<CompoundSpec> read_compounds(std::istream& in, const std::string& source) {
  std::vector<CompoundSpec> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError(source, line_no, "expected 'modifier<TAB>noun'");
    }
    CompoundSpec spec{line.substr(0, tab), line.substr(tab + 1)};
    if (spec.modifier.empty() || spec.noun.empty()) throw ParseError(source, line_no, "empty token");
    if (spec.modifier == spec.noun) throw ParseError(source, line_no, "modifier equals noun");
    out.push_back(std::move(spec));
  }
  return out;
}

std::vector<CompoundSpec> load_compounds(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open compounds " + path.string());
  return read_compounds(in, path.string());
}

std::string compound_token(const CompoundSpec& spec) { return spec.modifier + "_" + spec.noun; }

AugmentationSet compose_candidates(const EmbeddingSpace& space, const std::vector<CompoundSpec>& compounds,
                                   const Taxonomy& tax, const ComposeConfig& config, std::size_t* skipped) {
  AugmentationSet out(space.dim());
  const auto& excluded = config.exclusion_tokens;
  std::set<CompoundSpec> done;
  std::map<std::string, CompoundSpec> names;
  std::size_t oov = 0;

  // Pool for random_noun negatives: in-vocabulary taxonomy nodes.
  std::vector<std::string> noun_pool;
  if (config.negative_strategy == ComposeNegatives::random_noun) {
    for (const auto& n : tax.nodes()) {
      if (space.contains(n) && !excluded.count(n)) noun_pool.push_back(n);
    }
  }
  Rng rng(derive_seed(config.seed, {2}));

  for (const auto& spec : compounds) {
    if (!done.insert(spec).second) continue;
    if (!space.contains(spec.modifier) || !space.contains(spec.noun)) {
      ++oov;
      continue;
    }
    if (excluded.count(spec.modifier) || excluded.count(spec.noun)) continue;

    std::string name = compound_token(spec);
    for (int suffix = 2; names.count(name) && names.at(name) != spec; ++suffix) {
      name = compound_token(spec) + "~" + std::to_string(suffix);
    }
    names.emplace(name, spec);
    const Vector composed = compose(space, spec, config.mode);

    std::vector<std::string> targets{spec.noun};
    std::set<std::string> related{spec.noun};
    if (tax.contains(spec.noun)) {
      const auto up = tax.ancestors(spec.noun);
      related.insert(up.begin(), up.end());
      if (config.negative_strategy == ComposeNegatives::random_noun) {
        for (const auto& d : tax.nodes()) {
          if (tax.is_ancestor(d, spec.noun)) related.insert(d);
        }
      }
      if (config.include_transitive) {
        for (const auto& a : up) {
          if (space.contains(a)) targets.push_back(a);
        }
      }
    }

    for (const auto& target : targets) {
      if (excluded.count(target)) continue;
      const Vector tv = space.at(target);
      const std::set<std::string> sources{spec.modifier, spec.noun, target};
      out.add({name, target, composed, tv, true, Provenance::compose_aug, true, false, sources});
      switch (config.negative_strategy) {
        case ComposeNegatives::none: break;
        case ComposeNegatives::reversed:
          out.add({target, name, tv, composed, false, Provenance::compose_aug, false, true, sources});
          break;
        case ComposeNegatives::random_noun: {
          std::vector<const std::string*> pool;
          for (const auto& n : noun_pool) {
            if (!related.count(n) && n != spec.modifier) pool.push_back(&n);
          }
          if (pool.empty()) break;
          std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
          const std::string& other = *pool[pick(rng)];
          out.add({name, other, composed, space.at(other), false, Provenance::compose_aug, true, false,
                   {spec.modifier, spec.noun, other}});
          break;
        }
      }
    }
  }
  if (oov > 0) spdlog::info("compose: skipped {} compound(s) with out-of-vocabulary members", oov);
  if (skipped) *skipped = oov;
  return out;
}

AugmentationSet generate_compose_pairs(const EmbeddingSpace& space, const std::vector<CompoundSpec>& compounds,
                                       const Taxonomy& tax, const ComposeConfig& config) {
  if (config.max_pairs < 1) throw ValidationError("compose max_pairs must be >= 1");
  if (compounds.empty()) throw ValidationError("compose: no compounds given");
  auto all = compose_candidates(space, compounds, tax, config);
  if (all.size() <= config.max_pairs) return all;
  return all.select(sample_indices(all.size(), config.max_pairs, config.seed));
}

}  // namespace hyperaug

#include "hyperaug/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <istream>
#include <numeric>

#include <spdlog/spdlog.h>

#include "hyperaug/errors.hpp"
#include "hyperaug/random.hpp"

namespace hyperaug {

namespace {

const std::set<std::string> kNone;

}  // namespace

Taxonomy::Taxonomy(const std::vector<Edge>& edges) {
  for (const auto& [child, parent] : edges) {
    if (child.empty() || parent.empty()) throw ValidationError("taxonomy edge with an empty token");
    if (child == parent) throw ValidationError("self-edge on '" + child + "'");
    nodes_.insert(child);
    nodes_.insert(parent);
    if (parents_[child].insert(parent).second) {
      children_[parent].insert(child);
      ++edge_count_;
    }
  }
  // Three-colour DFS; on a back edge the cycle is read off the stack.
  enum Colour { white, grey, black };
  std::map<std::string, Colour> colour;
  std::vector<std::string> stack;
  std::function<void(const std::string&)> visit = [&](const std::string& node) {
    colour[node] = grey;
    stack.push_back(node);
    for (const auto& p : parents(node)) {
      const auto c = colour[p];
      if (c == grey) {
        auto from = std::find(stack.begin(), stack.end(), p);
        std::string cycle;
        for (auto it = from; it != stack.end(); ++it) cycle += *it + " -> ";
        throw CycleError("taxonomy cycle: " + cycle + p);
      }
      if (c == white) visit(p);
    }
    stack.pop_back();
    colour[node] = black;
  };
  for (const auto& n : nodes_) {
    if (colour[n] == white) visit(n);
  }
}

const std::set<std::string>& Taxonomy::parents(const std::string& node) const {
  auto it = parents_.find(node);
  return it == parents_.end() ? kNone : it->second;
}

const std::set<std::string>& Taxonomy::children(const std::string& node) const {
  auto it = children_.find(node);
  return it == children_.end() ? kNone : it->second;
}

std::set<std::string> Taxonomy::ancestors(const std::string& node) const {
  if (!contains(node)) throw LookupError("'" + node + "' is not a taxonomy node");
  std::set<std::string> out;
  std::vector<std::string> frontier(parents(node).begin(), parents(node).end());
  while (!frontier.empty()) {
    auto n = std::move(frontier.back());
    frontier.pop_back();
    if (!out.insert(n).second) continue;
    for (const auto& p : parents(n)) frontier.push_back(p);
  }
  return out;
}

bool Taxonomy::is_ancestor(const std::string& descendant, const std::string& ancestor) const {
  if (!contains(descendant) || !contains(ancestor)) return false;
  return ancestors(descendant).count(ancestor) > 0;
}

std::vector<std::string> Taxonomy::topological_order() const {
  // Kahn's algorithm over child -> parent edges.
  std::map<std::string, std::size_t> pending_children;
  for (const auto& n : nodes_) pending_children[n] = children(n).size();
  std::vector<std::string> ready;
  for (const auto& [n, c] : pending_children) {
    if (c == 0) ready.push_back(n);
  }
  std::vector<std::string> order;
  while (!ready.empty()) {
    auto n = ready.back();
    ready.pop_back();
    order.push_back(n);
    for (const auto& p : parents(n)) {
      if (--pending_children[p] == 0) ready.push_back(p);
    }
  }
  return order;
}

Taxonomy read_taxonomy(std::istream& in, const std::string& source) {
  std::vector<Taxonomy::Edge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError(source, line_no, "expected 'child<TAB>parent'");
    }
    auto child = line.substr(0, tab);
    auto parent = line.substr(tab + 1);
    if (child == parent) throw ValidationError(source + ":" + std::to_string(line_no) + ": self-edge on '" + child + "'");
    edges.emplace_back(std::move(child), std::move(parent));
  }
  return Taxonomy(edges);
}

Taxonomy load_taxonomy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open taxonomy " + path.string());
  return read_taxonomy(in, path.string());
}

std::string to_string(ExtensionStrategy s) {
  switch (s) {
    case ExtensionStrategy::closure_positives: return "closure_positives";
    case ExtensionStrategy::sibling_negatives: return "sibling_negatives";
    case ExtensionStrategy::random_negatives: return "random_negatives";
    case ExtensionStrategy::reversed_negatives: return "reversed_negatives";
  }
  return "?";
}

ExtensionStrategy parse_extension_strategy(const std::string& s) {
  if (s == "closure_positives") return ExtensionStrategy::closure_positives;
  if (s == "sibling_negatives") return ExtensionStrategy::sibling_negatives;
  if (s == "random_negatives") return ExtensionStrategy::random_negatives;
  if (s == "reversed_negatives") return ExtensionStrategy::reversed_negatives;
  throw ConfigError("unknown extension strategy '" + s + "'");
}

PairDataset extend_dataset(const PairDataset& data, const Taxonomy& tax, const ExtensionConfig& config) {
  if (config.max_pairs < 1) throw ValidationError("extension max_pairs must be >= 1");
  PairDataset out = data;
  const auto& excluded = config.exclusion_tokens;
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<LabeledPair> candidates;
  auto offer = [&](const std::string& x, const std::string& y, bool positive) {
    if (x == y || excluded.count(x) || excluded.count(y)) return;
    if (data.contains(x, y) || !seen.emplace(x, y).second) return;
    candidates.push_back({x, y, positive, Provenance::extension});
  };

  std::vector<std::string> seeds;
  for (const auto& t : data.tokens()) {
    if (tax.contains(t)) seeds.push_back(t);
  }

  switch (config.strategy) {
    case ExtensionStrategy::closure_positives:
      for (const auto& t : seeds) {
        for (const auto& a : tax.ancestors(t)) offer(t, a, true);
      }
      break;
    case ExtensionStrategy::reversed_negatives:
      for (const auto& t : seeds) {
        for (const auto& a : tax.ancestors(t)) offer(a, t, false);
      }
      break;
    case ExtensionStrategy::sibling_negatives:
      for (const auto& t : seeds) {
        const auto up = tax.ancestors(t);
        for (const auto& p : tax.parents(t)) {
          for (const auto& s : tax.children(p)) {
            if (s == t || up.count(s) || tax.is_ancestor(s, t)) continue;
            offer(t, s, false);
          }
        }
      }
      break;
    case ExtensionStrategy::random_negatives: {
      std::set<std::string> pool_set;
      for (const auto& t : seeds) {
        pool_set.insert(t);
        for (const auto& a : tax.ancestors(t)) pool_set.insert(a);
      }
      std::vector<std::string> pool;
      for (const auto& t : pool_set) {
        if (!excluded.count(t)) pool.push_back(t);
      }
      if (pool.size() >= 2) {
        Rng rng(derive_seed(config.seed, {1}));
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        const std::size_t attempts = 50 * config.max_pairs;
        for (std::size_t i = 0; i < attempts && candidates.size() < config.max_pairs; ++i) {
          const auto& x = pool[pick(rng)];
          const auto& y = pool[pick(rng)];
          if (x == y || tax.is_ancestor(x, y) || tax.is_ancestor(y, x)) continue;
          offer(x, y, false);
        }
      }
      break;
    }
  }

  if (candidates.empty()) {
    spdlog::warn("extend ({}): empty candidate pool, dataset unchanged", to_string(config.strategy));
    return out;
  }
  for (auto i : sample_indices(candidates.size(), config.max_pairs, config.seed)) out.add(candidates[i]);
  return out;
}

}  // namespace hyperaug

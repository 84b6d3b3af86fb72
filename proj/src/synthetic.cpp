#include "hyperaug/synthetic.hpp"

#include <fstream>
#include <random>
#include <set>

#include "hyperaug/errors.hpp"
#include "hyperaug/random.hpp"

namespace hyperaug {

namespace {

struct Blocks {
  Eigen::Index b1;  // first coordinate of block 1
  Eigen::Index b2;  // first coordinate of block 2
  Eigen::Index end;
};

Blocks blocks_for(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return {d * 3 / 8, d * 11 / 16, d};
}

Vector block_random(const Blocks& b, Eigen::Index from, Eigen::Index to, double mean, Rng& rng) {
  std::normal_distribution<double> n(mean, 1.0);
  Vector v = Vector::Zero(b.end);
  for (Eigen::Index i = from; i < to; ++i) v[i] = n(rng);
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

// Half closure pairs inside `nodes`, half negatives: a share of reversed
// closure pairs, the rest random pairs unrelated in either direction.
PairDataset balanced_pairs(const Taxonomy& tax, const std::set<std::string>& nodes, std::size_t total,
                           double reversed_share, std::uint64_t seed, const std::string& name) {
  std::vector<LabeledPair> closure;
  for (const auto& node : nodes) {
    for (const auto& a : tax.ancestors(node)) closure.push_back({node, a, true});
  }
  PairDataset out(name);
  const std::size_t n_pos = std::min(total / 2, closure.size());
  const std::size_t n_neg = std::min(total - total / 2, n_pos);
  for (auto i : sample_indices(closure.size(), n_pos, derive_seed(seed, {0}))) out.add(closure[i]);
  const auto n_reversed = static_cast<std::size_t>(std::llround(reversed_share * static_cast<double>(n_neg)));
  for (auto i : sample_indices(closure.size(), std::min(n_reversed, closure.size()), derive_seed(seed, {1}))) {
    out.add({closure[i].hypernym, closure[i].hyponym, false});
  }
  const std::vector<std::string> pool(nodes.begin(), nodes.end());
  std::uniform_int_distribution<std::size_t> any(0, pool.size() - 1);
  Rng rng(derive_seed(seed, {2}));
  for (std::size_t attempts = 0; out.size() < n_pos + n_neg && attempts < 100 * total + 1000; ++attempts) {
    const auto& x = pool[any(rng)];
    const auto& y = pool[any(rng)];
    if (x == y || tax.is_ancestor(x, y) || tax.is_ancestor(y, x)) continue;
    out.try_add({x, y, false});
  }
  return out;
}

}  // namespace

SyntheticWorld make_synthetic_world(const SyntheticWorldConfig& c) {
  if (c.dim < 3) throw ValidationError("synthetic world needs dim >= 3");
  if (c.roots < 2 || c.middles_per_root < 2 || c.leaves_per_middle < 1) {
    throw ValidationError("synthetic world needs >= 2 roots and >= 2 middles per root");
  }
  if (c.test_roots >= c.roots) throw ValidationError("test_roots must leave at least one training root");
  if (c.modifiers_per_noun > c.modifiers) throw ValidationError("modifiers_per_noun exceeds modifiers");
  if (!(c.reversed_negative_share >= 0 && c.reversed_negative_share <= 1)) {
    throw ValidationError("reversed_negative_share must be in [0,1]");
  }
  const Blocks b = blocks_for(c.dim);
  Rng rng(derive_seed(c.seed, {0}));
  std::normal_distribution<double> jitter(0.0, c.noise);

  std::vector<std::string> vocab;
  std::vector<Vector> clean;
  std::vector<Taxonomy::Edge> edges;
  std::vector<std::string> middles;
  for (std::size_t r = 0; r < c.roots; ++r) {
    const std::string root = "root" + std::to_string(r);
    const Vector vr = block_random(b, 0, b.b1, 0.0, rng);
    vocab.push_back(root);
    clean.push_back(vr);
    for (std::size_t m = 0; m < c.middles_per_root; ++m) {
      const std::string mid = "mid" + std::to_string(r) + "x" + std::to_string(m);
      const Vector vm = vr + block_random(b, b.b1, b.b2, c.detail_mean, rng);
      vocab.push_back(mid);
      clean.push_back(vm);
      middles.push_back(mid);
      edges.emplace_back(mid, root);
      for (std::size_t l = 0; l < c.leaves_per_middle; ++l) {
        const std::string leaf = mid + "x" + std::to_string(l);
        vocab.push_back(leaf);
        clean.push_back(vm + block_random(b, b.b2, b.end, c.detail_mean, rng));
        edges.emplace_back(leaf, mid);
      }
    }
  }
  std::vector<std::string> modifier_names;
  for (std::size_t m = 0; m < c.modifiers; ++m) {
    modifier_names.push_back("mod" + std::to_string(m));
    vocab.push_back(modifier_names.back());
    clean.push_back(block_random(b, b.b2, b.end, c.detail_mean, rng));
  }

  Matrix vectors(static_cast<Eigen::Index>(vocab.size()), b.end);
  for (std::size_t i = 0; i < clean.size(); ++i) {
    for (Eigen::Index j = 0; j < b.end; ++j) vectors(static_cast<Eigen::Index>(i), j) = clean[i][j] + jitter(rng);
  }

  SyntheticWorld world{EmbeddingSpace(vocab, vectors, "synthetic"), Taxonomy(edges), PairDataset("synthetic"),
                       PairDataset("synthetic-test"), {}};
  const Taxonomy& tax = world.taxonomy;

  std::vector<std::set<std::string>> subtree(c.roots);
  for (const auto& node : tax.nodes()) {
    const auto up = tax.ancestors(node);
    for (std::size_t r = 0; r < c.roots; ++r) {
      const std::string root = "root" + std::to_string(r);
      if (node == root || up.count(root)) subtree[r].insert(node);
    }
  }
  std::set<std::string> train_nodes, test_nodes;
  for (std::size_t r = 0; r < c.roots; ++r) {
    (r + c.test_roots < c.roots ? train_nodes : test_nodes).insert(subtree[r].begin(), subtree[r].end());
  }
  world.dataset = balanced_pairs(tax, train_nodes, c.dataset_pairs, c.reversed_negative_share,
                                 derive_seed(c.seed, {1}), "synthetic");
  if (c.test_roots > 0) {
    world.test = balanced_pairs(tax, test_nodes, c.test_pairs, c.reversed_negative_share,
                                derive_seed(c.seed, {2}), "synthetic-test");
  }

  // Compounds over middle nodes.
  Rng pick(derive_seed(c.seed, {3}));
  for (const auto& mid : middles) {
    for (auto i : sample_indices(c.modifiers, c.modifiers_per_noun, pick())) {
      world.compounds.push_back({modifier_names[i], mid});
    }
  }
  return world;
}

void save_synthetic_world(const std::filesystem::path& dir, const SyntheticWorld& world) {
  std::filesystem::create_directories(dir);
  save_space(dir / "space.txt", world.space);
  {
    auto out = open_out(dir / "taxonomy.tsv");
    for (const auto& node : world.taxonomy.nodes()) {
      for (const auto& p : world.taxonomy.parents(node)) out << node << '\t' << p << '\n';
    }
  }
  save_pairs(dir / "pairs.tsv", world.dataset, false);
  save_pairs(dir / "test.tsv", world.test, false);
  auto out = open_out(dir / "compounds.tsv");
  for (const auto& c : world.compounds) out << c.modifier << '\t' << c.noun << '\n';
}

}  // namespace hyperaug

#include <doctest.h>

#include <filesystem>
#include <map>
#include <random>
#include <sstream>

#include "hyperaug/augmentation.hpp"
#include "hyperaug/compose.hpp"
#include "hyperaug/embeddings.hpp"
#include "hyperaug/errors.hpp"
#include "hyperaug/taxonomy.hpp"
#include "oracles.hpp"

using namespace hyperaug;

namespace {

EmbeddingSpace toy_space() {
  Matrix m(5, 2);
  m << 1, 0,  // small
      0, 1,   // dog
      1, 1,   // animal
      2, 1,   // entity
      -1, 1;  // cat
  return EmbeddingSpace({"small", "dog", "animal", "entity", "cat"}, m);
}

Taxonomy toy_chain() { return Taxonomy({{"dog", "animal"}, {"animal", "entity"}, {"cat", "animal"}}); }

using Key = std::tuple<std::string, std::string, bool>;

std::multiset<Key> keys(const AugmentationSet& set) {
  std::multiset<Key> out;
  for (const auto& e : set.entries()) out.emplace(e.hypo_token, e.hyper_token, e.positive);
  return out;
}

}  // namespace

TEST_CASE("compose examples") {
  const auto s = toy_space();
  const Vector v = compose(s, {"small", "dog"}, ComposeMode::additive);
  CHECK(v == Vector((Vector(2) << 1, 1).finished()));
  CHECK(compose(s, {"dog", "dog"}, ComposeMode::mean) == s.at("dog"));
  CHECK_THROWS_WITH_AS(compose(s, {"tiny", "dog"}, ComposeMode::additive), doctest::Contains("tiny"), LookupError);
}

TEST_CASE("additive is twice the mean and obeys the triangle inequality") {
  std::mt19937_64 rng(8);
  std::vector<std::string> vocab;
  for (int i = 0; i < 30; ++i) vocab.push_back("w" + std::to_string(i));
  const EmbeddingSpace s(vocab, oracle::random_matrix(30, 9, rng));
  for (int i = 0; i < 29; ++i) {
    const CompoundSpec spec{vocab[i], vocab[i + 1]};
    const Vector a = compose(s, spec, ComposeMode::additive);
    const Vector m = compose(s, spec, ComposeMode::mean);
    CHECK(a.size() == 9);
    for (Eigen::Index c = 0; c < 9; ++c) CHECK(a[c] == 2.0 * m[c]);
    CHECK(a.norm() <= s.at(spec.modifier).norm() + s.at(spec.noun).norm() + 1e-12);
  }
}

TEST_CASE("compose over a chain with transitivity") {
  const auto s = toy_space();
  ComposeConfig cfg;
  const auto set = generate_compose_pairs(s, {{"small", "dog"}}, toy_chain(), cfg);
  REQUIRE(set.size() == 3);
  CHECK(keys(set) == std::multiset<Key>{{"small_dog", "dog", true}, {"small_dog", "animal", true},
                                        {"small_dog", "entity", true}});
  for (const auto& e : set.entries()) {
    CHECK(e.provenance == Provenance::compose_aug);
    CHECK(e.hypo_synthetic);
    CHECK_FALSE(e.hyper_synthetic);
  }
  cfg.include_transitive = false;
  CHECK(generate_compose_pairs(s, {{"small", "dog"}}, toy_chain(), cfg).size() == 1);
}

TEST_CASE("truncation is reproducible and a subset") {
  const auto s = toy_space();
  ComposeConfig cfg;
  cfg.max_pairs = 2;
  cfg.seed = 11;
  const auto a = generate_compose_pairs(s, {{"small", "dog"}}, toy_chain(), cfg);
  const auto b = generate_compose_pairs(s, {{"small", "dog"}}, toy_chain(), cfg);
  REQUIRE(a.size() == 2);
  CHECK(keys(a) == keys(b));
  const auto full = keys(compose_candidates(s, {{"small", "dog"}}, toy_chain(), cfg));
  for (const auto& k : keys(a)) CHECK(full.count(k) == 1);
}

TEST_CASE("truncated sets are nested across max_pairs") {
  const auto s = toy_space();
  const std::vector<CompoundSpec> compounds{{"small", "dog"}, {"small", "cat"}, {"cat", "dog"}, {"dog", "cat"}};
  ComposeConfig cfg;
  cfg.seed = 3;
  std::multiset<Key> previous;
  for (std::size_t n = 1; n <= 10; ++n) {
    cfg.max_pairs = n;
    const auto k = keys(generate_compose_pairs(s, compounds, toy_chain(), cfg));
    CHECK(std::includes(k.begin(), k.end(), previous.begin(), previous.end()));
    previous = k;
  }
}

TEST_CASE("negative strategies") {
  const auto s = toy_space();
  ComposeConfig cfg;
  cfg.negative_strategy = ComposeNegatives::reversed;
  const auto rev = generate_compose_pairs(s, {{"small", "dog"}}, toy_chain(), cfg);
  CHECK(rev.size() == 6);
  CHECK(keys(rev).count({"animal", "small_dog", false}) == 1);

  cfg.negative_strategy = ComposeNegatives::random_noun;
  const auto rnd = generate_compose_pairs(s, {{"small", "dog"}}, toy_chain(), cfg);
  for (const auto& e : rnd.entries()) {
    if (!e.positive) CHECK(e.hyper_token == "cat");  // the only unrelated noun
  }
}

TEST_CASE("OOV compounds are skipped and counted") {
  std::size_t skipped = 0;
  const auto set = compose_candidates(toy_space(), {{"tiny", "dog"}, {"small", "dog"}, {"small", "wolf"}},
                                      toy_chain(), ComposeConfig{}, &skipped);
  CHECK(skipped == 2);
  CHECK(set.size() == 3);
  CHECK_THROWS_AS(generate_compose_pairs(toy_space(), {}, toy_chain(), ComposeConfig{}), ValidationError);
}

TEST_CASE("exclusion tokens remove every derived candidate") {
  ComposeConfig cfg;
  cfg.exclusion_tokens = {"entity"};
  const auto set = generate_compose_pairs(toy_space(), {{"small", "dog"}}, toy_chain(), cfg);
  CHECK(set.size() == 2);
  for (const auto& e : set.entries()) CHECK(e.source_tokens.count("entity") == 0);
  cfg.exclusion_tokens = {"small"};
  CHECK(compose_candidates(toy_space(), {{"small", "dog"}}, toy_chain(), cfg).empty());
}

TEST_CASE("candidates equal brute-force enumeration on random taxonomies") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t nodes = 5 + rng() % 26;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < nodes; ++i) names.push_back("n" + std::to_string(i));
    // Edges from higher to lower index only, so the graph is acyclic.
    std::vector<Taxonomy::Edge> edges;
    std::map<std::string, std::set<std::string>> parents;
    for (std::size_t i = 1; i < nodes; ++i) {
      const std::size_t np = 1 + rng() % 2;
      for (std::size_t j = 0; j < np; ++j) {
        const auto& p = names[rng() % i];
        if (parents[names[i]].insert(p).second) edges.emplace_back(names[i], p);
      }
    }
    const Taxonomy tax(edges);
    const EmbeddingSpace space(names, oracle::random_matrix(static_cast<Eigen::Index>(nodes), 4, rng));

    std::vector<CompoundSpec> compounds;
    for (int c = 0; c < 6; ++c) {
      const auto& m = names[rng() % nodes];
      const auto& n = names[rng() % nodes];
      if (m != n) compounds.push_back({m, n});
    }
    if (compounds.empty()) continue;

    // Oracle: recursive walk up the parent map, no shared code with Taxonomy.
    std::function<void(const std::string&, std::set<std::string>&)> climb = [&](const std::string& n,
                                                                                 std::set<std::string>& acc) {
      for (const auto& p : parents[n]) {
        if (acc.insert(p).second) climb(p, acc);
      }
    };
    std::multiset<Key> expected;
    std::set<CompoundSpec> seen;
    for (const auto& c : compounds) {
      if (!seen.insert(c).second) continue;
      std::set<std::string> targets{c.noun};
      climb(c.noun, targets);
      for (const auto& t : targets) expected.emplace(compound_token(c), t, true);
    }
    const auto got = compose_candidates(space, compounds, tax, ComposeConfig{});
    CHECK(keys(got) == expected);
    for (const auto& e : got.entries()) {
      const auto dot = e.hypo_token.find('_');
      const CompoundSpec spec{e.hypo_token.substr(0, dot), e.hypo_token.substr(dot + 1)};
      CHECK(e.hypo == compose(space, spec, ComposeMode::additive));
      CHECK(e.hyper == space.at(e.hyper_token));
    }
  }
}

TEST_CASE("compound TSV") {
  std::istringstream in("small\tdog\n\nbig\tcat\n");
  const auto c = read_compounds(in, "t");
  CHECK(c == std::vector<CompoundSpec>{{"small", "dog"}, {"big", "cat"}});
  std::istringstream bad("dog\tdog\n");
  CHECK_THROWS_AS(read_compounds(bad, "t"), ParseError);
}

TEST_CASE("augmentation set invariants and persistence") {
  AugmentationSet set(2);
  const Vector a = Vector::Ones(2), b = Vector::Zero(2);
  set.add({"s1", "dog", a, b, true, Provenance::compose_aug, true, false, {"dog"}});
  CHECK_THROWS_AS(set.add({"s1", "cat", b, b, true, Provenance::compose_aug, true, false, {}}), DuplicateError);
  CHECK_THROWS_AS(set.add({"x", "y", Vector::Ones(3), b, true, Provenance::compose_aug, false, false, {}}),
                  ShapeError);
  Vector bad = a;
  bad[0] = std::nan("");
  CHECK_THROWS_AS(set.add({"s2", "dog", bad, b, true, Provenance::compose_aug, true, false, {}}), ValidationError);

  const auto s = toy_space();
  const auto gen = generate_compose_pairs(s, {{"small", "dog"}, {"small", "cat"}}, toy_chain(), ComposeConfig{});
  const auto dir = std::filesystem::temp_directory_path() / "hyperaug_test_compose";
  std::filesystem::create_directories(dir);
  save_augmentation(dir / "aug", gen);
  const auto back = load_augmentation(dir / "aug", s);
  REQUIRE(back.size() == gen.size());
  for (std::size_t i = 0; i < gen.size(); ++i) {
    CHECK(back[i].hypo_token == gen[i].hypo_token);
    CHECK(back[i].hyper_token == gen[i].hyper_token);
    CHECK(back[i].hypo == gen[i].hypo);
    CHECK(back[i].hyper == gen[i].hyper);
    CHECK(back[i].provenance == gen[i].provenance);
  }
  std::filesystem::remove_all(dir);
}

#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "hyperaug/embeddings.hpp"
#include "hyperaug/errors.hpp"
#include "oracles.hpp"

using namespace hyperaug;

namespace {

EmbeddingSpace from_text(const std::string& text) {
  std::istringstream in(text);
  return read_space(in, "test");
}

EmbeddingSpace random_space(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> vocab;
  for (std::size_t i = 0; i < n; ++i) vocab.push_back("w" + std::to_string(i));
  return EmbeddingSpace(vocab, oracle::random_matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d), rng));
}

}  // namespace

TEST_CASE("load a small text space") {
  const auto s = from_text("2 3\na 1 0 0\nb 0 1 0\n");
  CHECK(s.dim() == 3);
  REQUIRE(s.size() == 2);
  CHECK(s.vocab()[0] == "a");
  CHECK(s.vocab()[1] == "b");
  CHECK(s.at("b")[1] == 1.0);
}

TEST_CASE("parse errors carry the line number") {
  try {
    from_text("2 3\na 1 0 0\nb 0 1\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(from_text("two 3\n"), ParseError);
  CHECK_THROWS_AS(from_text("1 3\na 1 0 0 9\n"), ParseError);
  CHECK_THROWS_AS(from_text("1 2\na 1 x\n"), ParseError);
  CHECK_THROWS_AS(from_text("2 2\na 1 0\n"), ParseError);
  CHECK_THROWS_WITH_AS(from_text("2 1\nx 1\nx 2\n"), doctest::Contains("'x'"), DuplicateError);
}

TEST_CASE("save then load is bit-exact") {
  const auto s = random_space(5, 4, 3);
  std::stringstream buf;
  write_space(buf, s.vocab(), s.vectors());
  const auto back = read_space(buf, "roundtrip");
  CHECK(back.vocab() == s.vocab());
  CHECK(back.vectors() == s.vectors());
}

TEST_CASE("lookup of unknown tokens is explicit absence") {
  const auto s = from_text("1 2\na 1 2\n");
  CHECK_FALSE(s.lookup("zzz").has_value());
  CHECK_THROWS_AS(s.at("zzz"), LookupError);
  for (const auto& t : s.vocab()) CHECK(s.lookup(t).has_value());
}

TEST_CASE("cosine properties") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector u = oracle::random_matrix(7, 1, rng).col(0);
    const Vector v = oracle::random_matrix(7, 1, rng).col(0);
    CHECK(cosine(u, u) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(cosine(u, v) - cosine(v, u)) < 1e-12);
    const double alpha = 0.01 + 10.0 * std::uniform_real_distribution<double>(0, 1)(rng);
    CHECK(std::abs(cosine(alpha * u, v) - cosine(u, v)) < 1e-12);
  }
  CHECK_THROWS_AS(cosine(Vector::Zero(3), Vector::Ones(3)), DegenerateInputError);
}

TEST_CASE("nearest neighbours on an orthonormal toy space") {
  const auto s = from_text("3 3\nx 1 0 0\ny 0 1 0\nz 0 0 1\n");
  const auto nn = nearest_neighbors(s, s.at("x"), 2, {"x"});
  REQUIRE(nn.size() == 2);
  CHECK(nn[0].token == "y");  // tie broken by vocabulary order
  CHECK(nn[1].token == "z");
  CHECK(nn[0].cosine == 0.0);
  CHECK(nn[1].cosine == 0.0);
  CHECK_THROWS_AS(nearest_neighbors(s, Vector::Zero(3), 1), DegenerateInputError);
  CHECK(nearest_neighbors(s, s.at("x"), 10, {"x", "y"}).size() == 1);
}

TEST_CASE("nearest neighbours equal an exhaustive scan") {
  const auto s = random_space(50, 8, 12);
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector q = oracle::random_matrix(8, 1, rng).col(0);
    // Brute force: score every row with the textbook formula, stable sort.
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const Vector r = s.row(i);
      double dot = 0, nr = 0, nq = 0;
      for (Eigen::Index c = 0; c < 8; ++c) {
        dot += r[c] * q[c];
        nr += r[c] * r[c];
        nq += q[c] * q[c];
      }
      all.emplace_back(dot / std::sqrt(nr * nq), i);
    }
    std::stable_sort(all.begin(), all.end(), [](auto& a, auto& b) { return a.first > b.first; });
    const auto got = nearest_neighbors(s, q, 5);
    REQUIRE(got.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(got[i].token == s.vocab()[all[i].second]);
      CHECK(std::abs(got[i].cosine - all[i].first) < 1e-12);
      if (i) CHECK(got[i - 1].cosine >= got[i].cosine);
    }
  }
}

TEST_CASE("space construction validates its invariants") {
  Matrix m(2, 2);
  m << 1, 2, 3, std::nan("");
  CHECK_THROWS_AS(EmbeddingSpace({"a", "b"}, m), ValidationError);
  CHECK_THROWS_AS(EmbeddingSpace({"a", "a"}, Matrix::Zero(2, 2)), DuplicateError);
  CHECK_THROWS_AS(EmbeddingSpace({"a"}, Matrix::Zero(2, 2)), ValidationError);
}

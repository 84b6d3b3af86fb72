#include <doctest.h>

#include <random>
#include <sstream>

#include "hyperaug/errors.hpp"
#include "hyperaug/gandalf.hpp"
#include "hyperaug/nn/adam.hpp"
#include "hyperaug/nn/loss.hpp"
#include "oracles.hpp"

using namespace hyperaug;

namespace {

// hyper = hypo + [1,0] + N(0, 0.05^2); hyponyms around (-0.5, 0.5).
Matrix offset_pairs(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  std::normal_distribution<double> noise(0.0, 0.05);
  Matrix m(static_cast<Eigen::Index>(n), 4);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double x = -0.5 + u(rng), y = 0.5 + u(rng);
    m.row(i) << x, y, x + 1.0 + noise(rng), y + noise(rng);
  }
  return m;
}

GanConfig small_config(std::uint64_t seed) {
  GanConfig c;
  c.batch_size = 16;
  c.steps = 50;
  c.seed = seed;
  return c;
}

std::vector<Anchor> anchors_of(const Matrix& pairs, std::size_t n) {
  std::vector<Anchor> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({"w" + std::to_string(i), pairs.row(static_cast<Eigen::Index>(i)).head(pairs.cols() / 2).transpose()});
  }
  return out;
}

}  // namespace

TEST_CASE("defaults") {
  const GanConfig c;
  CHECK(c.learning_rate == 0.0002);
  CHECK(c.beta1 == 0.5);
  CHECK(c.beta2 == 0.999);
  CHECK(c.dropout_rate == 0.3);
  CHECK(c.resolved_noise_dim(16) == 8);
  CHECK(c.resolved_noise_dim(300) == 75);
  CHECK_NOTHROW(c.validate());
  GanConfig bad;
  bad.real_label_range = {0.4, 1.0};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = {};
  bad.fake_label_range = {0.0, 0.6};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = {};
  bad.label_flip_prob = 0.5;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("architecture") {
  Rng rng(1);
  Generator g(6, 8, GanMode::conditional, rng);
  CHECK(g.network().size() == 3);
  const Matrix out = g.forward(Matrix::Zero(4, 6), Matrix::Ones(4, 8), nn::Mode::train);
  CHECK(out.rows() == 4);
  CHECK(out.cols() == 6);
  Generator u(6, 8, GanMode::unconditional, rng);
  CHECK(u.forward(Matrix(0, 0), Matrix::Ones(3, 8), nn::Mode::eval).cols() == 12);
  Discriminator d(6, 0.3, 5, rng);
  CHECK(d.logits(Matrix::Zero(3, 12), nn::Mode::eval).cols() == 1);
  CHECK_THROWS_AS(g.forward(Matrix::Zero(4, 5), Matrix::Ones(4, 8), nn::Mode::train), ShapeError);
}

TEST_CASE("steps=0 returns initialised models with an empty log") {
  auto c = small_config(1);
  c.steps = 0;
  const auto m = gan_train(offset_pairs(10, 1), c);
  CHECK(m.log.empty());
  CHECK(m.generator.steps_trained() == 0);
}

TEST_CASE("too few real pairs is a data error") {
  CHECK_THROWS_AS(gan_train(offset_pairs(31, 1), small_config(1)), DataError);
}

TEST_CASE("hard labels when noise is disabled") {
  auto c = small_config(4);
  c.label_flip_prob = 0.0;
  c.real_label_range = {1.0, 1.0};
  c.fake_label_range = {0.0, 0.0};
  std::size_t calls = 0;
  GanHooks hooks;
  hooks.on_discriminator_targets = [&](std::size_t, std::span<const double> t, std::span<const bool> real,
                                       std::span<const bool> flipped) {
    ++calls;
    for (std::size_t i = 0; i < t.size(); ++i) {
      CHECK_FALSE(flipped[i]);
      CHECK(t[i] == (real[i] ? 1.0 : 0.0));
    }
  };
  gan_train(offset_pairs(64, 2), c, hooks);
  CHECK(calls == c.steps);
}

TEST_CASE("soft labels stay within their ranges") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto c = small_config(seed);
    c.label_flip_prob = 0.2;
    std::size_t flips = 0, total = 0;
    GanHooks hooks;
    hooks.on_discriminator_targets = [&](std::size_t, std::span<const double> t, std::span<const bool> real,
                                         std::span<const bool> flipped) {
      for (std::size_t i = 0; i < t.size(); ++i) {
        const bool as_real = real[i] != flipped[i];
        const auto& r = as_real ? c.real_label_range : c.fake_label_range;
        CHECK(t[i] >= r.lo);
        CHECK(t[i] <= r.hi);
        flips += flipped[i];
        ++total;
      }
    };
    gan_train(offset_pairs(64, seed), c, hooks);
    // 1600 Bernoulli(0.2) draws: mean 320, sd 16.
    CHECK(std::abs(static_cast<double>(flips) - 0.2 * static_cast<double>(total)) < 5 * 16);
  }
}

TEST_CASE("discriminator step descends on its own batch") {
  std::mt19937_64 data_rng(3);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    Discriminator d(4, 0.0, seed, rng);
    const Matrix batch = oracle::random_matrix(32, 8, data_rng);
    Matrix targets(32, 1);
    for (Eigen::Index i = 0; i < 32; ++i) targets(i, 0) = i < 16 ? 0.85 : 0.15;
    const double before = nn::bce_with_logits(d.logits(batch, nn::Mode::train), targets).loss;
    d.backward(nn::bce_with_logits(d.logits(batch, nn::Mode::train), targets).grad);
    nn::Adam opt({1e-4, 0.5, 0.999, 1e-8});
    opt.step(d.network().parameters());
    const double after = nn::bce_with_logits(d.logits(batch, nn::Mode::train), targets).loss;
    CHECK(after < before);
  }
}

TEST_CASE("training is reproducible and losses are finite") {
  const auto data = offset_pairs(64, 9);
  const auto a = gan_train(data, small_config(21));
  const auto b = gan_train(data, small_config(21));
  REQUIRE(a.log.size() == 50);
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].d_loss == b.log[i].d_loss);
    CHECK(a.log[i].g_loss == b.log[i].g_loss);
    CHECK(std::isfinite(a.log[i].d_loss));
    CHECK(std::isfinite(a.log[i].g_loss));
    CHECK(a.log[i].d_real_acc >= 0.0);
    CHECK(a.log[i].d_real_acc <= 1.0);
    CHECK(a.log[i].d_fake_acc >= 0.0);
    CHECK(a.log[i].d_fake_acc <= 1.0);
  }
  const auto c = gan_train(data, small_config(22));
  CHECK(c.log[10].d_loss != a.log[10].d_loss);
}

TEST_CASE("divergence reports the step and a start-of-step checkpoint") {
  Matrix data = offset_pairs(64, 1);
  data *= 1e10;
  auto c = small_config(1);
  c.learning_rate = 1e300;  // the first D update pushes generator-step logits past double range
  try {
    gan_train(data, c);
    FAIL("expected divergence");
  } catch (const GanDivergedError& e) {
    CHECK(e.checkpoint_generator().steps_trained() == e.step());
    CHECK(e.kind() == std::string("numeric"));
  }
}

TEST_CASE("sampling: counting, naming, range and determinism") {
  const auto data = offset_pairs(64, 2);
  auto m = gan_train(data, small_config(2));
  const auto anchors = anchors_of(data, 3);
  const auto s1 = gan_sample(m.generator, anchors, 1, 5);
  REQUIRE(s1.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(s1[i].hyper_token == "GANDALF-" + std::to_string(i));
    CHECK(s1[i].hypo_token == anchors[i].token);
    CHECK(s1[i].hypo == anchors[i].vector);
    CHECK(s1[i].positive);
    CHECK(s1[i].provenance == Provenance::gandalf_aug);
  }
  const auto s2 = gan_sample(m.generator, anchors, 1, 5);
  for (std::size_t i = 0; i < 3; ++i) CHECK(s1[i].hyper == s2[i].hyper);
  CHECK(gan_sample(m.generator, anchors, 4, 6, 100)[11].hyper_token == "GANDALF-111");
}

TEST_CASE("generated vectors stay finite and inside the tanh range") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Matrix data = offset_pairs(64, seed);
    data *= 5.0;  // real pairs well outside (-1,1)
    auto m = gan_train(data, small_config(seed));
    const auto set = gan_sample(m.generator, anchors_of(data, 20), 3, seed);
    for (const auto& e : set.entries()) {
      CHECK(e.hyper.allFinite());
      CHECK(e.hyper.cwiseAbs().maxCoeff() < 1.0);
    }
  }
}

TEST_CASE("unconditional mode samples fully synthetic pairs") {
  auto c = small_config(3);
  c.mode = GanMode::unconditional;
  auto m = gan_train(offset_pairs(64, 3), c);
  const auto s = gan_sample_unconditional(m.generator, 4, 1);
  REQUIRE(s.size() == 4);
  CHECK(s[0].hypo_token == "GANDALF-0");
  CHECK(s[0].hyper_token == "GANDALF-1");
  CHECK(s[3].hyper_token == "GANDALF-7");
  CHECK(s.synthetic_tokens().size() == 8);
  CHECK_THROWS_AS(gan_sample(m.generator, {}, 1, 1), ValidationError);
}

TEST_CASE("generator file round-trip") {
  auto m = gan_train(offset_pairs(64, 4), small_config(4));
  std::stringstream buf;
  write_generator(buf, m.generator);
  auto back = read_generator(buf);
  CHECK(back.steps_trained() == m.generator.steps_trained());
  CHECK(back.noise_dim() == m.generator.noise_dim());
  const auto anchors = anchors_of(offset_pairs(64, 4), 5);
  const auto a = gan_sample(m.generator, anchors, 2, 8);
  const auto b = gan_sample(back, anchors, 2, 8);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].hyper == b[i].hyper);
  std::istringstream bad("hyperaug-generator 7\n");
  CHECK_THROWS_AS(read_generator(bad), ParseError);
}

TEST_CASE("neighbour report") {
  Matrix m(3, 2);
  m << 1, 0, 0, 1, -1, 0;
  const EmbeddingSpace space({"dog", "cat", "car"}, m);
  AugmentationSet set(2);
  set.add({"x", "GANDALF-0", Vector::Ones(2), space.at("dog"), true, Provenance::gandalf_aug, false, true, {}});
  auto rows = neighbor_report(space, set, 1);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].synthetic_token == "GANDALF-0");
  REQUIRE(rows[0].neighbors.size() == 1);
  CHECK(rows[0].neighbors[0].token == "dog");
  CHECK(rows[0].neighbors[0].cosine == doctest::Approx(1.0));
  rows = neighbor_report(space, set, 10);
  CHECK(rows[0].neighbors.size() == 3);
  CHECK(neighbor_report(space, AugmentationSet(2), 3).empty());
}

TEST_CASE("neighbour report equals an exhaustive scan over real words") {
  std::mt19937_64 rng(6);
  std::vector<std::string> vocab;
  for (int i = 0; i < 40; ++i) vocab.push_back("r" + std::to_string(i));
  const EmbeddingSpace space(vocab, oracle::random_matrix(40, 5, rng));
  AugmentationSet set(5);
  for (int i = 0; i < 6; ++i) {
    set.add({vocab[static_cast<std::size_t>(i)], "GANDALF-" + std::to_string(i), space.row(static_cast<std::size_t>(i)),
             oracle::random_matrix(5, 1, rng).col(0), true, Provenance::gandalf_aug, false, true, {}});
  }
  const auto rows = neighbor_report(space, set, 4);
  REQUIRE(rows.size() == 6);
  for (const auto& row : rows) {
    const Vector q = set[std::stoul(row.synthetic_token.substr(8))].hyper;
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < space.size(); ++i) {
      const Vector r = space.row(i);
      all.emplace_back(r.dot(q) / (r.norm() * q.norm()), i);
    }
    std::stable_sort(all.begin(), all.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(row.neighbors[j].token == vocab[all[j].second]);
      CHECK(std::abs(row.neighbors[j].cosine - all[j].first) < 1e-12);
    }
  }
}

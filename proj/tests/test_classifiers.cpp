#include <doctest.h>

#include <optional>
#include <random>
#include <sstream>

#include "hyperaug/classifiers.hpp"
#include "hyperaug/embeddings.hpp"
#include "hyperaug/errors.hpp"
#include "hyperaug/features.hpp"
#include "hyperaug/feedforward.hpp"
#include "hyperaug/logistic.hpp"
#include "oracles.hpp"

using namespace hyperaug;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Four Gaussian clusters at (+-1, +-1); positive when the signs agree.
std::vector<VectorPair> xor_clusters(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, 0.3);
  std::vector<VectorPair> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double cx = (i & 1) ? 1.0 : -1.0, cy = (i & 2) ? 1.0 : -1.0;
    out.push_back({Vector::Zero(2), vec({cx + jitter(rng), cy + jitter(rng)}), cx * cy > 0});
  }
  return out;
}

// Words on a 2-D grid; a pair is positive when its difference lies in the
// first or third quadrant. Not separable by any single projection.
struct QuadrantWorld {
  EmbeddingSpace space;
  PairDataset data;
};

QuadrantWorld quadrant_world(std::size_t words, std::size_t pairs, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> vocab;
  for (std::size_t i = 0; i < words; ++i) vocab.push_back("q" + std::to_string(i));
  const Matrix m = oracle::random_matrix(static_cast<Eigen::Index>(words), 2, rng);
  QuadrantWorld w{EmbeddingSpace(vocab, m), PairDataset("quadrant")};
  while (w.data.size() < pairs) {
    const auto a = rng() % words, b = rng() % words;
    if (a == b) continue;
    const Vector d = m.row(static_cast<Eigen::Index>(a)) - m.row(static_cast<Eigen::Index>(b));
    if (std::abs(d[0]) < 0.1 || std::abs(d[1]) < 0.1) continue;  // keep a margin
    w.data.try_add({vocab[a], vocab[b], d[0] * d[1] > 0});
  }
  return w;
}

std::vector<double> flat_parameters(nn::Network net) {
  std::vector<double> out;
  for (const auto& p : net.parameters()) out.insert(out.end(), p.value.begin(), p.value.end());
  return out;
}

}  // namespace

TEST_CASE("aggregation examples") {
  CHECK(aggregate(AggregationKind::diff, vec({1, 2}), vec({0, 4})) == vec({1, -2}));
  CHECK(aggregate(AggregationKind::asym, vec({1, 2}), vec({0, 4})) == vec({1, -2, 1, 4}));
  CHECK(aggregate(AggregationKind::concat_asym, Vector::Ones(3), Vector::Zero(3)).size() == 12);
  CHECK(aggregate(AggregationKind::hyper_only, vec({1, 2}), vec({0, 4})) == vec({0, 4}));
  CHECK_THROWS_AS(aggregate(AggregationKind::diff, vec({1}), vec({1, 2})), ShapeError);
  CHECK(parse_aggregation("concat-asym") == AggregationKind::concat_asym);
  CHECK_THROWS_AS(parse_aggregation("sum"), ConfigError);
}

TEST_CASE("aggregation dimension and slice contracts for random d") {
  std::mt19937_64 rng(64);
  for (int trial = 0; trial < 200; ++trial) {
    const auto d = static_cast<Eigen::Index>(1 + rng() % 64);
    const Vector x = oracle::random_matrix(d, 1, rng).col(0);
    const Vector y = oracle::random_matrix(d, 1, rng).col(0);
    const Vector diff = aggregate(AggregationKind::diff, x, y);
    const Vector asym = aggregate(AggregationKind::asym, x, y);
    const Vector cat = aggregate(AggregationKind::concat_asym, x, y);
    const Vector hyp = aggregate(AggregationKind::hyper_only, x, y);
    CHECK(diff.size() == d);
    CHECK(asym.size() == 2 * d);
    CHECK(cat.size() == 4 * d);
    CHECK(hyp.size() == d);
    CHECK(asym.head(d) == diff);
    CHECK(cat.tail(2 * d) == asym);
    CHECK(cat.head(d) == x);
    CHECK(cat.segment(d, d) == y);
  }
}

TEST_CASE("hyper_only ignores the hyponym") {
  std::mt19937_64 rng(3);
  std::vector<VectorPair> pairs;
  for (int i = 0; i < 30; ++i) {
    pairs.push_back({oracle::random_matrix(5, 1, rng).col(0), oracle::random_matrix(5, 1, rng).col(0), i % 2 == 0});
  }
  auto shuffled = pairs;
  std::vector<Vector> hypos;
  for (const auto& p : pairs) hypos.push_back(p.hypo);
  std::shuffle(hypos.begin(), hypos.end(), rng);
  for (std::size_t i = 0; i < pairs.size(); ++i) shuffled[i].hypo = hypos[i];
  CHECK(featurize(AggregationKind::hyper_only, pairs) == featurize(AggregationKind::hyper_only, shuffled));
  CHECK(featurize(AggregationKind::diff, pairs) != featurize(AggregationKind::diff, shuffled));

  FeedforwardSpec spec{{4, 4, 4}, nn::ActivationKind::tanh, 0.0, AggregationKind::hyper_only};
  TrainSpec t;
  t.epochs = 3;
  t.batch_size = 8;
  const auto fit = ff_fit(spec, t, pairs);
  CHECK(fit.model.predict(pairs) == fit.model.predict(shuffled));
}

TEST_CASE("logistic regression: separable 1-D data") {
  Matrix x(2, 1);
  x << -1, 1;
  const std::vector<int> y{0, 1};
  const auto fit = lr_fit(x, y, 0.0, 1e-12, 200);
  CHECK(fit.model.weights[0] > 0);
  CHECK(fit.model.predict(x) == y);
}

TEST_CASE("logistic regression: heavy shrinkage") {
  Matrix x(4, 2);
  x << -1, 2, 1, -2, -3, 1, 2, 0.5;
  const std::vector<int> y{0, 1, 0, 1};
  const auto fit = lr_fit(x, y, 1e6);
  CHECK(fit.model.weights.norm() < 1e-2);
  // Stationarity: lambda*w = -mean((p - y) x), and |p - y| <= 1 bounds the
  // right side by max|x| / lambda.
  CHECK(fit.model.weights.cwiseAbs().maxCoeff() <= 3.0 / 1e6 + 1e-12);
}

TEST_CASE("logistic regression: single class is degenerate") {
  const std::vector<int> y{1, 1, 1};
  CHECK_THROWS_AS(lr_fit(Matrix::Ones(3, 2), y, 0.1), DegenerateInputError);
}

TEST_CASE("logistic regression: objective never increases") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = oracle::random_matrix(40, 6, rng);
    std::vector<int> y(40);
    for (int i = 0; i < 40; ++i) y[static_cast<std::size_t>(i)] = (x(i, 0) + 0.5 * x(i, 1) + 0.3 * oracle::random_matrix(1, 1, rng)(0, 0)) > 0;
    const auto fit = lr_fit(x, y, 0.05);
    REQUIRE(fit.objective_trace.size() >= 2);
    for (std::size_t i = 1; i < fit.objective_trace.size(); ++i) {
      CHECK(fit.objective_trace[i] <= fit.objective_trace[i - 1]);
    }
    CHECK(fit.converged);
  }
}

TEST_CASE("logistic regression matches a Newton-method optimum") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix x = oracle::random_matrix(60, 3, rng);
    std::vector<int> y(60);
    for (int i = 0; i < 60; ++i) y[static_cast<std::size_t>(i)] = (x(i, 0) - x(i, 2) + oracle::random_matrix(1, 1, rng)(0, 0)) > 0;
    const double lambda = 0.1;
    // Newton iterations on theta = (w, b) with an independent Hessian build.
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(4);
    for (int it = 0; it < 50; ++it) {
      Eigen::VectorXd g = Eigen::VectorXd::Zero(4);
      Eigen::MatrixXd h = Eigen::MatrixXd::Zero(4, 4);
      for (int i = 0; i < 60; ++i) {
        Eigen::VectorXd xi(4);
        xi << x(i, 0), x(i, 1), x(i, 2), 1.0;
        const double p = 1.0 / (1.0 + std::exp(-xi.dot(theta)));
        g += (p - y[static_cast<std::size_t>(i)]) * xi / 60.0;
        h += p * (1 - p) * xi * xi.transpose() / 60.0;
      }
      for (int j = 0; j < 3; ++j) {
        g[j] += lambda * theta[j];
        h(j, j) += lambda;
      }
      theta -= h.ldlt().solve(g);
    }
    // Parameter error is about tol / lambda at a gradient-norm stop.
    const auto fit = lr_fit(x, y, lambda, 1e-7, 100000);
    CHECK(fit.converged);
    for (int j = 0; j < 3; ++j) CHECK(std::abs(fit.model.weights[j] - theta[j]) < 1e-5);
    CHECK(std::abs(fit.model.bias - theta[3]) < 1e-5);
  }
}

TEST_CASE("logistic model round-trip") {
  LogisticModel m{vec({0.1, -2.5, 1e-9}), 0.75, 0.01};
  std::stringstream buf;
  write_logistic(buf, m);
  const auto back = read_logistic(buf);
  CHECK(back.weights == m.weights);
  CHECK(back.bias == m.bias);
  CHECK(back.l2_strength == m.l2_strength);
}

TEST_CASE("early stopping bookkeeping") {
  EarlyStopping es(2);
  CHECK(es.observe(0.5));
  CHECK_FALSE(es.observe(0.5));  // equal is not an improvement
  CHECK_FALSE(es.should_stop());
  CHECK_FALSE(es.observe(0.4));
  CHECK(es.should_stop());
  EarlyStopping never(kNoEarlyStop);
  for (int i = 0; i < 100; ++i) never.observe(0.0);
  CHECK_FALSE(never.should_stop());
}

TEST_CASE("ff_fit without early stopping runs every epoch") {
  TrainSpec t;
  t.epochs = 7;
  t.batch_size = 16;
  t.early_stop_patience = kNoEarlyStop;
  const auto fit = ff_fit({{4, 4, 4}, nn::ActivationKind::relu, 0.1, AggregationKind::hyper_only}, t,
                          xor_clusters(80, 1));
  CHECK(fit.history.size() == 7);
  CHECK_FALSE(fit.stopped_early);
  for (std::size_t i = 0; i < 7; ++i) CHECK(fit.history[i].epoch == i + 1);
}

TEST_CASE("ff_fit stops after patience with a scripted decreasing metric") {
  TrainSpec t;
  t.epochs = 30;
  t.batch_size = 16;
  t.early_stop_patience = 2;
  std::optional<nn::Network> after_first;
  const ValidationMetric scripted = [&](const FeedforwardModel& m, std::size_t epoch) {
    if (epoch == 1) after_first = m.network();
    return 1.0 - 0.1 * static_cast<double>(epoch);
  };
  const auto fit = ff_fit({{4, 4, 4}, nn::ActivationKind::tanh, 0.0, AggregationKind::hyper_only}, t,
                          xor_clusters(80, 2), scripted);
  CHECK(fit.history.size() == 3);
  CHECK(fit.stopped_early);
  CHECK(fit.best_epoch == 1);
  CHECK(fit.best_validation_accuracy == doctest::Approx(0.9));
  REQUIRE(after_first.has_value());
  CHECK(flat_parameters(fit.model.network()) == flat_parameters(*after_first));
}

TEST_CASE("ff_fit is deterministic without dropout and keeps the best snapshot") {
  TrainSpec t;
  t.epochs = 10;
  t.batch_size = 16;
  t.seed = 77;
  const FeedforwardSpec spec{{8, 8, 8}, nn::ActivationKind::tanh, 0.0, AggregationKind::hyper_only};
  const auto data = xor_clusters(120, 3);
  const auto a = ff_fit(spec, t, data);
  const auto b = ff_fit(spec, t, data);
  CHECK(flat_parameters(a.model.network()) == flat_parameters(b.model.network()));
  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    CHECK(a.history[i].train_loss == b.history[i].train_loss);
    CHECK(a.history[i].validation_accuracy == b.history[i].validation_accuracy);
  }
  CHECK(a.best_validation_accuracy >= a.history.back().validation_accuracy);
}

TEST_CASE("ff_fit learns XOR clusters") {
  const FeedforwardSpec spec{{8, 8, 8}, nn::ActivationKind::tanh, 0.0, AggregationKind::hyper_only};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto data = xor_clusters(200, seed + 100);
    TrainSpec t;
    t.seed = seed;
    t.batch_size = 16;
    t.early_stop_patience = kNoEarlyStop;
    const auto fit = ff_fit(spec, t, data);
    CHECK(evaluate(fit.model, data) >= 0.95);
  }
}

TEST_CASE("ff_fit rejects tiny inputs") {
  TrainSpec t;
  t.batch_size = 64;
  CHECK_THROWS_AS(ff_fit(FeedforwardSpec{}, t, xor_clusters(127, 1)), DataError);
}

TEST_CASE("feedforward model round-trip") {
  TrainSpec t;
  t.epochs = 2;
  t.batch_size = 16;
  const auto fit = ff_fit({{5, 4, 3}, nn::ActivationKind::relu, 0.3, AggregationKind::asym}, t, xor_clusters(64, 4));
  std::stringstream buf;
  write_feedforward(buf, fit.model);
  const auto back = read_feedforward(buf);
  CHECK(back.spec() == fit.model.spec());
  const auto data = xor_clusters(50, 9);
  CHECK(back.predict(data) == fit.model.predict(data));
}

TEST_CASE("evaluate: constant, perfect and hand-counted models") {
  auto data = xor_clusters(40, 5);
  const LogisticModel always{Vector::Zero(2), 5.0, 0.0};
  CHECK(evaluate(always, AggregationKind::hyper_only, data) == 0.5);

  for (auto& p : data) p.positive = p.hyper[0] > 0;
  const LogisticModel perfect{vec({10.0, 0.0}), 0.0, 0.0};
  CHECK(evaluate(perfect, AggregationKind::hyper_only, data) == 1.0);

  std::mt19937_64 rng(20);
  std::vector<VectorPair> random_set;
  for (int i = 0; i < 20; ++i) {
    random_set.push_back({oracle::random_matrix(3, 1, rng).col(0), oracle::random_matrix(3, 1, rng).col(0), rng() % 2 == 0});
  }
  const LogisticModel m{vec({0.3, -1.2, 0.8}), 0.1, 0.0};
  int correct = 0;
  for (const auto& p : random_set) {
    double z = m.bias;
    for (int j = 0; j < 3; ++j) z += m.weights[j] * (p.hypo[j] - p.hyper[j]);
    correct += (z >= 0) == p.positive;
  }
  CHECK(evaluate(m, AggregationKind::diff, random_set) == static_cast<double>(correct) / 20.0);
  CHECK_THROWS_AS(evaluate(m, AggregationKind::diff, std::vector<VectorPair>{}), DataError);
}

TEST_CASE("evaluate on a dataset filters out-of-vocabulary pairs") {
  const EmbeddingSpace space({"a", "b"}, (Matrix(2, 1) << 1.0, -1.0).finished());
  PairDataset d("t");
  d.add({"a", "b", true});
  d.add({"a", "zzz", false});
  const LogisticModel m{vec({1.0}), 0.0, 0.0};
  CHECK(evaluate(m, AggregationKind::diff, d, space) == 1.0);
  PairDataset oov("t");
  oov.add({"x", "y", true});
  CHECK_THROWS_AS(evaluate(m, AggregationKind::diff, oov, space), DataError);
}

TEST_CASE("expand_grid order") {
  const auto g = expand_grid({{2, 2, 2}, {3, 3, 3}}, {nn::ActivationKind::tanh, nn::ActivationKind::relu}, {0.0, 0.1},
                             {AggregationKind::diff, AggregationKind::asym});
  REQUIRE(g.size() == 16);
  CHECK(g[0] == FeedforwardSpec{{2, 2, 2}, nn::ActivationKind::tanh, 0.0, AggregationKind::diff});
  CHECK(g[1] == FeedforwardSpec{{2, 2, 2}, nn::ActivationKind::tanh, 0.1, AggregationKind::diff});
  CHECK(g[2] == FeedforwardSpec{{2, 2, 2}, nn::ActivationKind::relu, 0.0, AggregationKind::diff});
  CHECK(g[8].aggregation == AggregationKind::asym);
}

TEST_CASE("grid search: singleton, ties and thread independence") {
  const auto w = quadrant_world(60, 160, 8);
  TrainSpec t;
  t.epochs = 3;
  t.batch_size = 16;
  const FeedforwardSpec cell{{4, 4, 4}, nn::ActivationKind::tanh, 0.0, AggregationKind::diff};

  const auto one = grid_search(w.data, w.space, {cell}, t, 3, 1);
  CHECK(one.best == cell);
  CHECK(one.table.size() == 1);
  CHECK(one.table[0].fold_accuracies.size() == 3);

  const auto twins = grid_search(w.data, w.space, {cell, cell}, t, 3, 1);
  CHECK(twins.best_index == 0);

  const auto serial = grid_search(w.data, w.space, {cell, {{3, 3, 3}, nn::ActivationKind::relu, 0.1, AggregationKind::asym}}, t, 3, 4, 1);
  const auto parallel = grid_search(w.data, w.space, {cell, {{3, 3, 3}, nn::ActivationKind::relu, 0.1, AggregationKind::asym}}, t, 3, 4, 3);
  REQUIRE(serial.table.size() == parallel.table.size());
  for (std::size_t i = 0; i < serial.table.size(); ++i) {
    CHECK(serial.table[i].fold_accuracies == parallel.table[i].fold_accuracies);
  }
  std::ostringstream a, b;
  write_grid_csv(a, serial);
  write_grid_csv(b, parallel);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("cell,hidden,activation,dropout,aggregation,mean_accuracy", 0) == 0);
}

TEST_CASE("grid search prefers a real network over a 1-1-1 bottleneck") {
  const auto w = quadrant_world(120, 400, 21);
  TrainSpec t;
  t.batch_size = 16;
  t.early_stop_patience = kNoEarlyStop;
  const FeedforwardSpec thin{{1, 1, 1}, nn::ActivationKind::tanh, 0.0, AggregationKind::diff};
  const FeedforwardSpec wide{{16, 16, 16}, nn::ActivationKind::tanh, 0.0, AggregationKind::diff};
  const auto r = grid_search(w.data, w.space, {thin, wide}, t, 3, 2);
  MESSAGE("1-1-1: " << r.table[0].mean_accuracy << "  16-16-16: " << r.table[1].mean_accuracy);
  CHECK(r.best == wide);
}

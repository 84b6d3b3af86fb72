#include "hyperaug/gandalf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <spdlog/spdlog.h>

#include "hyperaug/nn/adam.hpp"
#include "hyperaug/nn/loss.hpp"
#include "hyperaug/random.hpp"

namespace hyperaug {

std::string to_string(GanMode m) { return m == GanMode::conditional ? "conditional" : "unconditional"; }

GanMode parse_gan_mode(const std::string& s) {
  if (s == "conditional") return GanMode::conditional;
  if (s == "unconditional") return GanMode::unconditional;
  throw ConfigError("unknown GAN mode '" + s + "'");
}

void GanConfig::validate() const {
  if (!(learning_rate > 0)) throw ValidationError("gan learning_rate must be > 0");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) {
    throw ValidationError("gan betas must be in [0,1)");
  }
  if (!(dropout_rate >= 0 && dropout_rate < 1)) throw ValidationError("gan dropout_rate must be in [0,1)");
  const auto& r = real_label_range;
  const auto& f = fake_label_range;
  if (!(r.lo > 0.5 && r.lo <= r.hi && r.hi <= 1.0)) {
    throw ValidationError("real_label_range must satisfy 0.5 < lo <= hi <= 1");
  }
  if (!(f.lo >= 0.0 && f.lo <= f.hi && f.hi < 0.5)) {
    throw ValidationError("fake_label_range must satisfy 0 <= lo <= hi < 0.5");
  }
  if (!(label_flip_prob >= 0 && label_flip_prob < 0.5)) throw ValidationError("label_flip_prob must be in [0,0.5)");
  if (batch_size == 0) throw ValidationError("gan batch_size must be >= 1");
  if (!(init_std > 0 && std::isfinite(init_std))) throw ValidationError("gan init_std must be positive");
}

std::size_t GanConfig::resolved_noise_dim(std::size_t dim) const {
  return noise_dim > 0 ? noise_dim : std::max<std::size_t>(dim / 4, 8);
}

namespace {

nn::DenseLayer gaussian_dense(std::size_t in, std::size_t out, double init_std, Rng& rng) {
  std::normal_distribution<double> n(0.0, init_std);
  Matrix w(out, in);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = n(rng);
  return nn::DenseLayer(std::move(w), Vector::Zero(static_cast<Eigen::Index>(out)));
}

nn::Network make_generator_net(std::size_t dim, std::size_t noise_dim, GanMode mode, double init_std, Rng& rng) {
  const std::size_t in = mode == GanMode::conditional ? dim + noise_dim : noise_dim;
  const std::size_t out = mode == GanMode::conditional ? dim : 2 * dim;
  nn::Network net;
  net.add(gaussian_dense(in, out, init_std, rng));
  net.add(nn::BatchNormLayer(out));
  net.add(nn::ActivationLayer(nn::ActivationKind::tanh));
  return net;
}

Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

double uniform_in(const LabelRange& r, Rng& rng) {
  if (r.lo == r.hi) return r.lo;
  return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

}  // namespace

Generator::Generator(std::size_t dim, std::size_t noise_dim, GanMode mode, Rng& rng, double init_std)
    : dim_(dim), noise_dim_(noise_dim), mode_(mode), net_(make_generator_net(dim, noise_dim, mode, init_std, rng)) {}

Generator::Generator(std::size_t dim, std::size_t noise_dim, GanMode mode, nn::Network net,
                     std::uint64_t steps_trained)
    : dim_(dim), noise_dim_(noise_dim), mode_(mode), net_(std::move(net)), steps_trained_(steps_trained) {}

Matrix Generator::forward(const Matrix& anchors, const Matrix& noise, nn::Mode mode) {
  if (static_cast<std::size_t>(noise.cols()) != noise_dim_) throw ShapeError("generator: noise width mismatch");
  if (mode_ == GanMode::unconditional) return net_.forward(noise, mode);
  if (static_cast<std::size_t>(anchors.cols()) != dim_) throw ShapeError("generator: anchor width mismatch");
  if (anchors.rows() != noise.rows()) throw ShapeError("generator: anchor and noise batch sizes differ");
  Matrix input(anchors.rows(), anchors.cols() + noise.cols());
  input << anchors, noise;
  return net_.forward(input, mode);
}

Discriminator::Discriminator(std::size_t dim, double dropout_rate, std::uint64_t seed, Rng& rng, double init_std)
    : dim_(dim) {
  net_.add(nn::DropoutLayer(dropout_rate, seed));
  net_.add(gaussian_dense(2 * dim, 1, init_std, rng));
}

GanModel gan_train(const Matrix& real_pairs, const GanConfig& config, const GanHooks& hooks) {
  config.validate();
  if (real_pairs.cols() < 2 || real_pairs.cols() % 2 != 0) {
    throw ShapeError("gan_train: real pairs must have 2*dim columns");
  }
  const auto dim = static_cast<std::size_t>(real_pairs.cols() / 2);
  const auto n = static_cast<std::size_t>(real_pairs.rows());
  const std::size_t batch = config.batch_size;
  if (config.steps > 0 && n < 2 * batch) {
    throw DataError("gan_train: need at least " + std::to_string(2 * batch) + " real pairs, got " +
                    std::to_string(n));
  }
  if (!real_pairs.allFinite()) throw NumericError("gan_train: non-finite real pair");

  Rng init_rng(derive_seed(config.seed, {0}));
  Rng rng(derive_seed(config.seed, {1}));
  GanModel model{Generator(dim, config.resolved_noise_dim(dim), config.mode, init_rng, config.init_std),
                 Discriminator(dim, config.dropout_rate, derive_seed(config.seed, {2}), init_rng, config.init_std),
                 {}};
  auto& gen = model.generator;
  auto& disc = model.discriminator;
  const nn::AdamConfig adam_cfg{config.learning_rate, config.beta1, config.beta2, 1e-8};
  nn::Adam g_opt(adam_cfg);
  nn::Adam d_opt(adam_cfg);

  const auto b = static_cast<Eigen::Index>(batch);
  const auto d = static_cast<Eigen::Index>(dim);
  std::uniform_int_distribution<std::size_t> pick(0, n == 0 ? 0 : n - 1);
  std::bernoulli_distribution flip(config.label_flip_prob);
  std::vector<double> targets(2 * batch);
  std::unique_ptr<bool[]> is_real(new bool[2 * batch]);
  std::unique_ptr<bool[]> flipped(new bool[2 * batch]);

  model.log.reserve(config.steps);
  for (std::size_t step = 0; step < config.steps; ++step) {
    Matrix real(b, 2 * d);
    Matrix anchors(b, d);
    for (Eigen::Index i = 0; i < b; ++i) real.row(i) = real_pairs.row(static_cast<Eigen::Index>(pick(rng)));
    for (Eigen::Index i = 0; i < b; ++i) {
      anchors.row(i) = real_pairs.row(static_cast<Eigen::Index>(pick(rng))).head(d);
    }
    const Matrix noise = standard_normal(b, static_cast<Eigen::Index>(gen.noise_dim()), rng);
    const Matrix generated = gen.forward(anchors, noise, nn::Mode::train);
    Matrix fake(b, 2 * d);
    if (config.mode == GanMode::conditional) {
      fake << anchors, generated;
    } else {
      fake = generated;
    }

    // Discriminator step on [real; fake].
    Matrix d_input(2 * b, 2 * d);
    d_input << real, fake;
    Matrix d_targets(2 * b, 1);
    for (std::size_t i = 0; i < 2 * batch; ++i) {
      is_real[i] = i < batch;
      flipped[i] = flip(rng);
      const bool as_real = is_real[i] != flipped[i];
      targets[i] = uniform_in(as_real ? config.real_label_range : config.fake_label_range, rng);
      d_targets(static_cast<Eigen::Index>(i), 0) = targets[i];
    }
    if (hooks.on_discriminator_targets) {
      hooks.on_discriminator_targets(step, targets, std::span<const bool>(is_real.get(), 2 * batch),
                                     std::span<const bool>(flipped.get(), 2 * batch));
    }
    const Discriminator disc_before = disc;
    const Matrix d_logits = disc.logits(d_input, nn::Mode::train);
    const auto d_loss = nn::bce_with_logits(d_logits, d_targets);
    if (!std::isfinite(d_loss.loss)) throw GanDivergedError(step, gen, disc_before);
    GanStepLog entry;
    entry.d_loss = d_loss.loss;
    for (Eigen::Index i = 0; i < b; ++i) {
      entry.d_real_acc += d_logits(i, 0) > 0.0 ? 1.0 : 0.0;
      entry.d_fake_acc += d_logits(b + i, 0) < 0.0 ? 1.0 : 0.0;
    }
    entry.d_real_acc /= static_cast<double>(batch);
    entry.d_fake_acc /= static_cast<double>(batch);
    disc.backward(d_loss.grad);
    d_opt.step(disc.network().parameters());

    // Generator step through the updated, frozen discriminator.
    Matrix g_targets(b, 1);
    for (Eigen::Index i = 0; i < b; ++i) g_targets(i, 0) = uniform_in(config.real_label_range, rng);
    const Matrix g_logits = disc.logits(fake, nn::Mode::train);
    const auto g_loss = nn::bce_with_logits(g_logits, g_targets);
    if (!std::isfinite(g_loss.loss)) throw GanDivergedError(step, gen, disc_before);
    entry.g_loss = g_loss.loss;
    const Matrix grad_pair = disc.backward(g_loss.grad);
    const Matrix grad_generated =
        config.mode == GanMode::conditional ? Matrix(grad_pair.rightCols(d)) : grad_pair;
    gen.backward(grad_generated);
    g_opt.step(gen.network().parameters());
    gen.mark_step();
    model.log.push_back(entry);
  }
  return model;
}

GanModel gan_train(const std::vector<VectorPair>& real_pairs, const GanConfig& config, const GanHooks& hooks) {
  if (real_pairs.empty()) throw DataError("gan_train: no real pairs");
  const auto d = real_pairs.front().hypo.size();
  Matrix m(static_cast<Eigen::Index>(real_pairs.size()), 2 * d);
  for (std::size_t i = 0; i < real_pairs.size(); ++i) {
    const auto& p = real_pairs[i];
    if (p.hypo.size() != d || p.hyper.size() != d) throw ShapeError("gan_train: pairs differ in dimension");
    m.row(static_cast<Eigen::Index>(i)) << p.hypo.transpose(), p.hyper.transpose();
  }
  return gan_train(m, config, hooks);
}

AugmentationSet gan_sample(Generator& gen, const std::vector<Anchor>& anchors, std::size_t n_per_anchor,
                           std::uint64_t seed, std::size_t first_index) {
  if (gen.mode() != GanMode::conditional) {
    throw ValidationError("gan_sample needs a conditional generator; use gan_sample_unconditional");
  }
  if (n_per_anchor == 0) throw ValidationError("n_per_anchor must be >= 1");
  if (gen.steps_trained() == 0) spdlog::warn("gan_sample: generator has not been trained");
  AugmentationSet out(gen.dim());
  if (anchors.empty()) return out;
  const auto rows = static_cast<Eigen::Index>(anchors.size() * n_per_anchor);
  const auto d = static_cast<Eigen::Index>(gen.dim());
  Matrix a(rows, d);
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    if (anchors[i].vector.size() != d) throw ShapeError("gan_sample: anchor '" + anchors[i].token + "' dim mismatch");
    for (std::size_t j = 0; j < n_per_anchor; ++j) {
      a.row(static_cast<Eigen::Index>(i * n_per_anchor + j)) = anchors[i].vector.transpose();
    }
  }
  Rng rng(seed);
  const Matrix z = standard_normal(rows, static_cast<Eigen::Index>(gen.noise_dim()), rng);
  const Matrix g = gen.forward(a, z, nn::Mode::eval);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& anchor = anchors[static_cast<std::size_t>(r) / n_per_anchor];
    AugmentedPair e;
    e.hypo_token = anchor.token;
    e.hyper_token = "GANDALF-" + std::to_string(first_index + static_cast<std::size_t>(r));
    e.hypo = anchor.vector;
    e.hyper = g.row(r).transpose();
    e.positive = true;
    e.provenance = Provenance::gandalf_aug;
    e.hyper_synthetic = true;
    e.source_tokens = {anchor.token};
    out.add(std::move(e));
  }
  return out;
}

AugmentationSet gan_sample_unconditional(Generator& gen, std::size_t count, std::uint64_t seed,
                                         std::size_t first_index) {
  if (gen.mode() != GanMode::unconditional) throw ValidationError("generator is conditional");
  if (gen.steps_trained() == 0) spdlog::warn("gan_sample: generator has not been trained");
  AugmentationSet out(gen.dim());
  if (count == 0) return out;
  Rng rng(seed);
  const auto d = static_cast<Eigen::Index>(gen.dim());
  const Matrix z = standard_normal(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(gen.noise_dim()), rng);
  const Matrix g = gen.forward(Matrix(0, 0), z, nn::Mode::eval);
  for (std::size_t i = 0; i < count; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    AugmentedPair e;
    e.hypo_token = "GANDALF-" + std::to_string(first_index + 2 * i);
    e.hyper_token = "GANDALF-" + std::to_string(first_index + 2 * i + 1);
    e.hypo = g.row(r).head(d).transpose();
    e.hyper = g.row(r).tail(d).transpose();
    e.positive = true;
    e.provenance = Provenance::gandalf_aug;
    e.hypo_synthetic = e.hyper_synthetic = true;
    out.add(std::move(e));
  }
  return out;
}

void write_generator(std::ostream& out, const Generator& gen) {
  out << "hyperaug-generator 1\n";
  out << "mode " << to_string(gen.mode()) << '\n';
  out << "dim " << gen.dim() << " noise_dim " << gen.noise_dim() << " steps " << gen.steps_trained() << '\n';
  nn::write_network(out, gen.network());
}

Generator read_generator(std::istream& in) {
  std::string magic, key, mode;
  int version = 0;
  if (!(in >> magic >> version) || magic != "hyperaug-generator") {
    throw ParseError("generator", 1, "not a generator file");
  }
  if (version != 1) throw ParseError("generator", 1, "unsupported generator version " + std::to_string(version));
  std::size_t dim = 0, noise = 0;
  std::uint64_t steps = 0;
  std::string k1, k2, k3;
  if (!(in >> key >> mode) || key != "mode") throw ParseError("generator", 2, "expected 'mode'");
  if (!(in >> k1 >> dim >> k2 >> noise >> k3 >> steps) || k1 != "dim" || k2 != "noise_dim" || k3 != "steps") {
    throw ParseError("generator", 3, "expected 'dim <d> noise_dim <n> steps <s>'");
  }
  return Generator(dim, noise, parse_gan_mode(mode), nn::read_network(in), steps);
}

void save_generator(const std::filesystem::path& path, const Generator& gen) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_generator(out, gen);
}

Generator load_generator(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open generator " + path.string());
  return read_generator(in);
}

std::vector<NeighborRow> neighbor_report(const EmbeddingSpace& space, const AugmentationSet& aug, std::size_t k) {
  if (!aug.empty() && aug.dim() != space.dim()) throw ShapeError("neighbor_report: dimension mismatch");
  const auto names = aug.synthetic_tokens();
  const Matrix vectors = aug.synthetic_vectors();
  const std::set<std::string> exclude(names.begin(), names.end());
  std::vector<NeighborRow> rows;
  rows.reserve(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    const Vector v = vectors.row(static_cast<Eigen::Index>(i)).transpose();
    NeighborRow row{names[i], {}};
    if (v.norm() > 0.0) row.neighbors = nearest_neighbors(space, v, k, exclude);
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(),
            [](const NeighborRow& a, const NeighborRow& b) { return a.synthetic_token < b.synthetic_token; });
  return rows;
}

}  // namespace hyperaug

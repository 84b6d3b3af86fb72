#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hyperaug/augmentation.hpp"
#include "hyperaug/embeddings.hpp"
#include "hyperaug/errors.hpp"
#include "hyperaug/nn/network.hpp"

namespace hyperaug {

// conditional: G(hyponym ⊕ noise) -> hypernym vector.
// unconditional: G(noise) -> (hyponym ⊕ hypernym).
enum class GanMode { conditional, unconditional };

std::string to_string(GanMode m);
GanMode parse_gan_mode(const std::string& s);

struct LabelRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct GanConfig {
  std::size_t noise_dim = 0;  // 0 selects max(dim / 4, 8)
  double learning_rate = 0.0002;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double dropout_rate = 0.3;
  LabelRange real_label_range{0.7, 1.0};
  LabelRange fake_label_range{0.0, 0.3};
  double label_flip_prob = 0.05;
  std::size_t batch_size = 64;
  std::size_t steps = 2000;
  std::uint64_t seed = 0;
  GanMode mode = GanMode::conditional;
  // Dense weights of both networks start as N(0, init_std^2), biases at 0.
  double init_std = 0.02;

  // ValidationError when a field is out of its allowed range.
  void validate() const;
  std::size_t resolved_noise_dim(std::size_t dim) const;
};

// Single dense layer -> batch norm -> tanh.
class Generator {
 public:
  Generator(std::size_t dim, std::size_t noise_dim, GanMode mode, Rng& rng, double init_std = 0.02);
  Generator(std::size_t dim, std::size_t noise_dim, GanMode mode, nn::Network net, std::uint64_t steps_trained);

  // conditional: anchors [B x dim], noise [B x noise_dim] -> hypernyms [B x dim].
  // unconditional: anchors ignored (may be empty) -> pairs [B x 2dim].
  Matrix forward(const Matrix& anchors, const Matrix& noise, nn::Mode mode);
  Matrix backward(const Matrix& grad_out) { return net_.backward(grad_out); }

  std::size_t dim() const { return dim_; }
  std::size_t noise_dim() const { return noise_dim_; }
  GanMode mode() const { return mode_; }
  std::uint64_t steps_trained() const { return steps_trained_; }
  void mark_step() { ++steps_trained_; }
  nn::Network& network() { return net_; }
  const nn::Network& network() const { return net_; }

 private:
  std::size_t dim_;
  std::size_t noise_dim_;
  GanMode mode_;
  nn::Network net_;
  std::uint64_t steps_trained_ = 0;
};

// Dropout -> single dense layer to one logit over the concatenated pair.
class Discriminator {
 public:
  Discriminator(std::size_t dim, double dropout_rate, std::uint64_t seed, Rng& rng, double init_std = 0.02);

  Matrix logits(const Matrix& pairs, nn::Mode mode) { return net_.forward(pairs, mode); }
  Matrix backward(const Matrix& grad_out) { return net_.backward(grad_out); }

  std::size_t dim() const { return dim_; }
  nn::Network& network() { return net_; }
  const nn::Network& network() const { return net_; }

 private:
  std::size_t dim_;
  nn::Network net_;
};

struct GanStepLog {
  double d_loss = 0.0;
  double g_loss = 0.0;
  double d_real_acc = 0.0;
  double d_fake_acc = 0.0;
};

using GanTrainingLog = std::vector<GanStepLog>;

// Test hook: sees each discriminator target batch. is_real marks real rows,
// flipped marks rows whose label was flipped.
struct GanHooks {
  std::function<void(std::size_t step, std::span<const double> targets, std::span<const bool> is_real,
                     std::span<const bool> flipped)>
      on_discriminator_targets;
};

struct GanModel {
  Generator generator;
  Discriminator discriminator;
  GanTrainingLog log;
};

// Thrown when a loss goes non-finite. Carries the models as they were at the
// start of the failing step.
class GanDivergedError : public NumericError {
 public:
  GanDivergedError(std::size_t step, Generator g, Discriminator d)
      : NumericError("GAN loss became non-finite at step " + std::to_string(step)),
        step_(step),
        generator_(std::move(g)),
        discriminator_(std::move(d)) {}
  std::size_t step() const { return step_; }
  const Generator& checkpoint_generator() const { return generator_; }
  const Discriminator& checkpoint_discriminator() const { return discriminator_; }

 private:
  std::size_t step_;
  Generator generator_;
  Discriminator discriminator_;
};

// Alternating 1:1 D/G updates with ADAM on both. real_pairs are rows of
// (hyponym ⊕ hypernym), i.e. [N x 2dim].
GanModel gan_train(const Matrix& real_pairs, const GanConfig& config, const GanHooks& hooks = {});
GanModel gan_train(const std::vector<VectorPair>& real_pairs, const GanConfig& config,
                   const GanHooks& hooks = {});

struct Anchor {
  std::string token;
  Vector vector;
};

// For each anchor, n_per_anchor (anchor, G(anchor ⊕ z)) positive pairs named
// "GANDALF-<first_index + k>". Batch norm runs in eval mode.
AugmentationSet gan_sample(Generator& gen, const std::vector<Anchor>& anchors, std::size_t n_per_anchor,
                           std::uint64_t seed, std::size_t first_index = 0);

// Unconditional generators: count pairs with both sides synthetic.
AugmentationSet gan_sample_unconditional(Generator& gen, std::size_t count, std::uint64_t seed,
                                         std::size_t first_index = 0);

void write_generator(std::ostream& out, const Generator& gen);
Generator read_generator(std::istream& in);
void save_generator(const std::filesystem::path& path, const Generator& gen);
Generator load_generator(const std::filesystem::path& path);

struct NeighborRow {
  std::string synthetic_token;
  std::vector<Neighbor> neighbors;
};

// k nearest real words for every synthetic vector in the set, sorted by
// synthetic token. Synthetic names never appear as neighbours.
std::vector<NeighborRow> neighbor_report(const EmbeddingSpace& space, const AugmentationSet& aug, std::size_t k);

}  // namespace hyperaug

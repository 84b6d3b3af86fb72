#include "hyperaug/augmentation.hpp"

#include <fstream>
#include <map>

#include "hyperaug/embeddings.hpp"
#include "hyperaug/errors.hpp"

namespace hyperaug {

namespace {

void check_vector(const Vector& v, std::size_t dim, const std::string& token) {
  if (static_cast<std::size_t>(v.size()) != dim) {
    throw ShapeError("augmentation vector '" + token + "' has dim " + std::to_string(v.size()) +
                     ", set has " + std::to_string(dim));
  }
  if (!v.allFinite()) throw ValidationError("augmentation vector '" + token + "' is not finite");
}

}  // namespace

void AugmentationSet::add(AugmentedPair entry) {
  check_vector(entry.hypo, dim_, entry.hypo_token);
  check_vector(entry.hyper, dim_, entry.hyper_token);
  auto check_name = [&](const std::string& name, const Vector& v) {
    auto it = synthetic_index_.find(name);
    if (it == synthetic_index_.end()) return;
    const auto& prior = entries_[it->second.first];
    const Vector& seen = it->second.second ? prior.hyper : prior.hypo;
    if (seen != v) throw DuplicateError("synthetic token '" + name + "' reused for a different vector");
  };
  if (entry.hypo_synthetic) check_name(entry.hypo_token, entry.hypo);
  if (entry.hyper_synthetic) check_name(entry.hyper_token, entry.hyper);
  const auto index = entries_.size();
  if (entry.hypo_synthetic) synthetic_index_.try_emplace(entry.hypo_token, index, false);
  if (entry.hyper_synthetic) synthetic_index_.try_emplace(entry.hyper_token, index, true);
  entries_.push_back(std::move(entry));
}

AugmentationSet AugmentationSet::prefix(std::size_t n) const {
  AugmentationSet out(dim_);
  for (std::size_t i = 0; i < std::min(n, size()); ++i) out.add(entries_[i]);
  return out;
}

AugmentationSet AugmentationSet::select(const std::vector<std::size_t>& indices) const {
  AugmentationSet out(dim_);
  for (auto i : indices) out.add(entries_.at(i));
  return out;
}

std::vector<std::string> AugmentationSet::synthetic_tokens() const {
  std::vector<std::string> names;
  std::set<std::string> seen;
  for (const auto& e : entries_) {
    if (e.hypo_synthetic && seen.insert(e.hypo_token).second) names.push_back(e.hypo_token);
    if (e.hyper_synthetic && seen.insert(e.hyper_token).second) names.push_back(e.hyper_token);
  }
  return names;
}

Matrix AugmentationSet::synthetic_vectors() const {
  std::vector<const Vector*> rows;
  std::set<std::string> seen;
  for (const auto& e : entries_) {
    if (e.hypo_synthetic && seen.insert(e.hypo_token).second) rows.push_back(&e.hypo);
    if (e.hyper_synthetic && seen.insert(e.hyper_token).second) rows.push_back(&e.hyper);
  }
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim_));
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = rows[i]->transpose();
  return out;
}

std::set<std::string> AugmentationSet::referenced_real_tokens() const {
  std::set<std::string> out;
  for (const auto& e : entries_) {
    if (!e.hypo_synthetic) out.insert(e.hypo_token);
    if (!e.hyper_synthetic) out.insert(e.hyper_token);
  }
  return out;
}

std::vector<VectorPair> AugmentationSet::vector_pairs() const {
  std::vector<VectorPair> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back({e.hypo, e.hyper, e.positive});
  return out;
}

std::filesystem::path augmentation_vectors_path(const std::filesystem::path& stem) {
  return stem.string() + ".vectors.txt";
}

std::filesystem::path augmentation_pairs_path(const std::filesystem::path& stem) {
  return stem.string() + ".pairs.tsv";
}

void save_augmentation(const std::filesystem::path& stem, const AugmentationSet& set) {
  {
    std::ofstream out(augmentation_vectors_path(stem));
    if (!out) throw IoError("cannot write " + augmentation_vectors_path(stem).string());
    const auto names = set.synthetic_tokens();
    if (names.empty()) {
      out << "0 " << set.dim() << '\n';
    } else {
      write_space(out, names, set.synthetic_vectors());
    }
  }
  std::ofstream out(augmentation_pairs_path(stem));
  if (!out) throw IoError("cannot write " + augmentation_pairs_path(stem).string());
  for (const auto& e : set.entries()) {
    out << e.hypo_token << '\t' << e.hyper_token << '\t' << (e.positive ? 1 : 0) << '\t'
        << to_string(e.provenance) << '\n';
  }
}

AugmentationSet load_augmentation(const std::filesystem::path& stem, const EmbeddingSpace& real_space) {
  const auto vec_path = augmentation_vectors_path(stem);
  std::ifstream vin(vec_path);
  if (!vin) throw IoError("cannot open " + vec_path.string());
  const auto synthetic = read_space(vin, vec_path.string());
  const std::size_t dim = synthetic.size() > 0 ? synthetic.dim() : real_space.dim();
  if (synthetic.size() > 0 && synthetic.dim() != real_space.dim()) {
    throw ShapeError("augmentation vectors have dim " + std::to_string(synthetic.dim()) +
                     ", space has " + std::to_string(real_space.dim()));
  }
  const auto pairs = parse_pairs(augmentation_pairs_path(stem), "augmentation");
  AugmentationSet set(dim);
  auto resolve = [&](const std::string& token, bool& is_synthetic) {
    if (auto v = synthetic.lookup(token)) {
      is_synthetic = true;
      return *v;
    }
    is_synthetic = false;
    return real_space.at(token);
  };
  for (const auto& p : pairs.pairs()) {
    AugmentedPair e;
    e.hypo_token = p.hyponym;
    e.hyper_token = p.hypernym;
    e.hypo = resolve(p.hyponym, e.hypo_synthetic);
    e.hyper = resolve(p.hypernym, e.hyper_synthetic);
    e.positive = p.positive;
    e.provenance = p.provenance;
    if (!e.hypo_synthetic) e.source_tokens.insert(e.hypo_token);
    if (!e.hyper_synthetic) e.source_tokens.insert(e.hyper_token);
    set.add(std::move(e));
  }
  return set;
}

}  // namespace hyperaug

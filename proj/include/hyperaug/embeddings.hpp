#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hyperaug/nn/tensor.hpp"

namespace hyperaug {

// A vocabulary-indexed embedding matrix. Immutable once built.
class EmbeddingSpace {
 public:
  EmbeddingSpace() = default;
  // Throws DuplicateError on repeated tokens, ValidationError on non-finite
  // entries or a row count that does not match the vocabulary.
  EmbeddingSpace(std::vector<std::string> vocab, Matrix vectors, std::string name = {});

  std::size_t dim() const { return static_cast<std::size_t>(vectors_.cols()); }
  std::size_t size() const { return vocab_.size(); }
  const std::string& name() const { return name_; }
  const std::vector<std::string>& vocab() const { return vocab_; }
  const Matrix& vectors() const { return vectors_; }

  std::optional<std::size_t> index_of(const std::string& token) const;
  bool contains(const std::string& token) const { return index_.count(token) > 0; }
  // Row for a token, or nullopt for unknown tokens.
  std::optional<Vector> lookup(const std::string& token) const;
  // Throws LookupError naming the token.
  Vector at(const std::string& token) const;
  Vector row(std::size_t i) const { return vectors_.row(static_cast<Eigen::Index>(i)).transpose(); }

 private:
  std::vector<std::string> vocab_;
  Matrix vectors_;
  std::string name_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Text word2vec format: "<count> <dim>" header, then "<token> v1 .. v_dim".
EmbeddingSpace read_space(std::istream& in, const std::string& source = "<stream>",
                          std::string name = {});
EmbeddingSpace load_space(const std::filesystem::path& path, std::string name = {});
// Values are written with round-trip precision.
void write_space(std::ostream& out, std::span<const std::string> tokens, const Matrix& vectors);
void save_space(const std::filesystem::path& path, const EmbeddingSpace& space);

double cosine(const Vector& u, const Vector& v);

struct Neighbor {
  std::string token;
  double cosine = 0.0;
};

// k most cosine-similar rows, descending, ties by vocabulary order. Fewer
// than k come back when exclusions shrink the pool. Throws
// DegenerateInputError for a zero query.
std::vector<Neighbor> nearest_neighbors(const EmbeddingSpace& space, const Vector& query,
                                        std::size_t k, const std::set<std::string>& exclude = {});

}  // namespace hyperaug

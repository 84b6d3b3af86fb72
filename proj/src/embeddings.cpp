#include "hyperaug/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "hyperaug/errors.hpp"

namespace hyperaug {

EmbeddingSpace::EmbeddingSpace(std::vector<std::string> vocab, Matrix vectors, std::string name)
    : vocab_(std::move(vocab)), vectors_(std::move(vectors)), name_(std::move(name)) {
  if (static_cast<std::size_t>(vectors_.rows()) != vocab_.size()) {
    throw ValidationError("embedding space: " + std::to_string(vocab_.size()) + " tokens but " +
                          std::to_string(vectors_.rows()) + " rows");
  }
  if (!vectors_.allFinite()) throw ValidationError("embedding space: non-finite entry");
  index_.reserve(vocab_.size());
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    if (!index_.emplace(vocab_[i], i).second) {
      throw DuplicateError("duplicate token '" + vocab_[i] + "' in embedding space");
    }
  }
}

std::optional<std::size_t> EmbeddingSpace::index_of(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<Vector> EmbeddingSpace::lookup(const std::string& token) const {
  auto i = index_of(token);
  if (!i) return std::nullopt;
  return row(*i);
}

Vector EmbeddingSpace::at(const std::string& token) const {
  auto i = index_of(token);
  if (!i) throw LookupError("token '" + token + "' not in embedding space");
  return row(*i);
}

EmbeddingSpace read_space(std::istream& in, const std::string& source, std::string name) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(source, 1, "missing header");
  long long count = -1, dim = -1;
  {
    std::istringstream header(line);
    std::string rest;
    if (!(header >> count >> dim) || (header >> rest) || count < 0 || dim <= 0) {
      throw ParseError(source, 1, "malformed header, expected '<count> <dim>'");
    }
  }
  std::vector<std::string> vocab;
  vocab.reserve(static_cast<std::size_t>(count));
  Matrix vectors(count, dim);
  std::set<std::string> seen;
  for (long long r = 0; r < count; ++r) {
    ++line_no;
    if (!std::getline(in, line)) {
      throw ParseError(source, line_no, "expected " + std::to_string(count) + " rows, file ended");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream row(line);
    std::string token;
    if (!(row >> token)) throw ParseError(source, line_no, "empty row");
    long long got = 0;
    std::string cell;
    while (row >> cell) {
      if (got >= dim) {
        throw ParseError(source, line_no, "row has more than " + std::to_string(dim) + " values");
      }
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0' || !std::isfinite(v)) {
        throw ParseError(source, line_no, "bad value '" + cell + "'");
      }
      vectors(r, got++) = v;
    }
    if (got != dim) {
      throw ParseError(source, line_no,
                       "row has " + std::to_string(got) + " values, header says " + std::to_string(dim));
    }
    if (!seen.insert(token).second) {
      throw DuplicateError("duplicate token '" + token + "' at " + source + ":" + std::to_string(line_no));
    }
    vocab.push_back(std::move(token));
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      throw ParseError(source, line_no, "more rows than the header count");
    }
  }
  return EmbeddingSpace(std::move(vocab), std::move(vectors), std::move(name));
}

EmbeddingSpace load_space(const std::filesystem::path& path, std::string name) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file " + path.string());
  return read_space(in, path.string(), std::move(name));
}

void write_space(std::ostream& out, std::span<const std::string> tokens, const Matrix& vectors) {
  if (static_cast<std::size_t>(vectors.rows()) != tokens.size()) {
    throw ShapeError("write_space: token count != row count");
  }
  const auto old = out.precision(17);
  out << tokens.size() << ' ' << vectors.cols() << '\n';
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out << tokens[i];
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) out << ' ' << vectors(static_cast<Eigen::Index>(i), c);
    out << '\n';
  }
  out.precision(old);
}

void save_space(const std::filesystem::path& path, const EmbeddingSpace& space) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_space(out, space.vocab(), space.vectors());
}

double cosine(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) throw ShapeError("cosine: dimension mismatch");
  const double nu = u.norm(), nv = v.norm();
  if (nu == 0.0 || nv == 0.0) throw DegenerateInputError("cosine of a zero vector");
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

std::vector<Neighbor> nearest_neighbors(const EmbeddingSpace& space, const Vector& query,
                                        std::size_t k, const std::set<std::string>& exclude) {
  if (static_cast<std::size_t>(query.size()) != space.dim()) {
    throw ShapeError("nearest_neighbors: query has dim " + std::to_string(query.size()) +
                     ", space has " + std::to_string(space.dim()));
  }
  const double qn = query.norm();
  if (qn == 0.0) throw DegenerateInputError("nearest_neighbors: zero query vector");
  struct Scored {
    double cos;
    std::size_t index;
  };
  std::vector<Scored> scored;
  scored.reserve(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (exclude.count(space.vocab()[i])) continue;
    const auto r = space.vectors().row(static_cast<Eigen::Index>(i));
    const double rn = r.norm();
    // Zero rows have no direction; they rank below every real neighbour.
    const double c = rn == 0.0 ? -2.0 : std::clamp(r.dot(query) / (rn * qn), -1.0, 1.0);
    scored.push_back({c, i});
  }
  const std::size_t take = std::min(k, scored.size());
  auto by_rank = [](const Scored& a, const Scored& b) {
    if (a.cos != b.cos) return a.cos > b.cos;
    return a.index < b.index;
  };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), by_rank);
  std::vector<Neighbor> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    out.push_back({space.vocab()[scored[i].index], std::max(scored[i].cos, -1.0)});
  }
  return out;
}

}  // namespace hyperaug

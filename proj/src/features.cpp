#include "hyperaug/features.hpp"

#include "hyperaug/embeddings.hpp"
#include "hyperaug/errors.hpp"

namespace hyperaug {

std::string to_string(AggregationKind kind) {
  switch (kind) {
    case AggregationKind::diff: return "diff";
    case AggregationKind::asym: return "asym";
    case AggregationKind::concat_asym: return "concat_asym";
    case AggregationKind::hyper_only: return "hyper_only";
  }
  return "?";
}

AggregationKind parse_aggregation(const std::string& name) {
  if (name == "diff") return AggregationKind::diff;
  if (name == "asym") return AggregationKind::asym;
  if (name == "concat_asym" || name == "concat-asym") return AggregationKind::concat_asym;
  if (name == "hyper_only") return AggregationKind::hyper_only;
  throw ConfigError("unknown aggregation '" + name + "'");
}

std::size_t aggregated_dim(AggregationKind kind, std::size_t d) {
  switch (kind) {
    case AggregationKind::diff: return d;
    case AggregationKind::asym: return 2 * d;
    case AggregationKind::concat_asym: return 4 * d;
    case AggregationKind::hyper_only: return d;
  }
  return d;
}

Vector aggregate(AggregationKind kind, const Vector& hypo, const Vector& hyper) {
  if (hypo.size() != hyper.size()) {
    throw ShapeError("aggregate: hyponym dim " + std::to_string(hypo.size()) + " != hypernym dim " +
                     std::to_string(hyper.size()));
  }
  const auto d = hypo.size();
  switch (kind) {
    case AggregationKind::diff: return hypo - hyper;
    case AggregationKind::asym: {
      Vector out(2 * d);
      out.head(d) = hypo - hyper;
      out.tail(d) = out.head(d).array().square();
      return out;
    }
    case AggregationKind::concat_asym: {
      Vector out(4 * d);
      out.segment(0, d) = hypo;
      out.segment(d, d) = hyper;
      out.segment(2 * d, d) = hypo - hyper;
      out.segment(3 * d, d) = out.segment(2 * d, d).array().square();
      return out;
    }
    case AggregationKind::hyper_only: return hyper;
  }
  return hyper;
}

Matrix featurize(AggregationKind kind, const std::vector<VectorPair>& examples) {
  if (examples.empty()) return Matrix(0, 0);
  const auto d = static_cast<std::size_t>(examples.front().hypo.size());
  Matrix out(static_cast<Eigen::Index>(examples.size()), static_cast<Eigen::Index>(aggregated_dim(kind, d)));
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const Vector f = aggregate(kind, examples[i].hypo, examples[i].hyper);
    if (f.size() != out.cols()) throw ShapeError("featurize: examples differ in dimension");
    out.row(static_cast<Eigen::Index>(i)) = f.transpose();
  }
  return out;
}

std::vector<int> labels_of(const std::vector<VectorPair>& examples) {
  std::vector<int> out;
  out.reserve(examples.size());
  for (const auto& e : examples) out.push_back(e.positive ? 1 : 0);
  return out;
}

std::vector<VectorPair> to_vector_pairs(const PairDataset& data, const EmbeddingSpace& space,
                                        std::size_t* dropped) {
  std::vector<VectorPair> out;
  out.reserve(data.size());
  std::size_t missing = 0;
  for (const auto& p : data.pairs()) {
    auto hypo = space.lookup(p.hyponym);
    auto hyper = space.lookup(p.hypernym);
    if (!hypo || !hyper) {
      ++missing;
      continue;
    }
    out.push_back({std::move(*hypo), std::move(*hyper), p.positive});
  }
  if (dropped) *dropped = missing;
  return out;
}

}  // namespace hyperaug

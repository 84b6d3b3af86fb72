#include "hyperaug/datasets.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "hyperaug/embeddings.hpp"
#include "hyperaug/errors.hpp"
#include "hyperaug/random.hpp"

namespace hyperaug {

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::original: return "original";
    case Provenance::extension: return "extension";
    case Provenance::compose_aug: return "compose_aug";
    case Provenance::gandalf_aug: return "gandalf_aug";
  }
  return "?";
}

Provenance parse_provenance(const std::string& s) {
  if (s == "original") return Provenance::original;
  if (s == "extension") return Provenance::extension;
  if (s == "compose_aug") return Provenance::compose_aug;
  if (s == "gandalf_aug") return Provenance::gandalf_aug;
  throw ValidationError("unknown provenance '" + s + "'");
}

bool PairDataset::contains(const std::string& hyponym, const std::string& hypernym) const {
  return keys_.count({hyponym, hypernym}) > 0;
}

void PairDataset::add(LabeledPair pair) {
  if (!try_add(pair)) {
    throw DuplicateError("duplicate pair (" + pair.hyponym + ", " + pair.hypernym + ") in " + name_);
  }
}

bool PairDataset::try_add(LabeledPair pair) {
  if (!keys_.emplace(pair.hyponym, pair.hypernym).second) return false;
  pairs_.push_back(std::move(pair));
  return true;
}

std::size_t PairDataset::count_positive() const {
  return static_cast<std::size_t>(
      std::count_if(pairs_.begin(), pairs_.end(), [](const LabeledPair& p) { return p.positive; }));
}

std::set<std::string> PairDataset::tokens() const {
  std::set<std::string> out;
  for (const auto& p : pairs_) {
    out.insert(p.hyponym);
    out.insert(p.hypernym);
  }
  return out;
}

PairDataset PairDataset::subset(const std::vector<std::size_t>& indices) const {
  PairDataset out(name_, split_);
  for (auto i : indices) out.add(pairs_.at(i));
  return out;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    cells.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return cells;
}

}  // namespace

PairDataset read_pairs(std::istream& in, const std::string& source, std::string name, Split split) {
  PairDataset data(std::move(name), split);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto cells = split_tabs(line);
    if (cells.size() != 3 && cells.size() != 4) {
      throw ParseError(source, line_no, "expected 3 or 4 tab-separated fields");
    }
    if (cells[0].empty() || cells[1].empty()) throw ParseError(source, line_no, "empty token");
    if (cells[0] == cells[1]) {
      throw ParseError(source, line_no, "hyponym equals hypernym ('" + cells[0] + "')");
    }
    LabeledPair pair{cells[0], cells[1], false, Provenance::original};
    const auto& label = cells[2];
    if (label == "1" || label == "true" || label == "True") {
      pair.positive = true;
    } else if (label == "0" || label == "false" || label == "False") {
      pair.positive = false;
    } else {
      throw ParseError(source, line_no, "bad label '" + label + "'");
    }
    if (cells.size() == 4) {
      try {
        pair.provenance = parse_provenance(cells[3]);
      } catch (const ValidationError& e) {
        throw ParseError(source, line_no, e.what());
      }
    }
    if (data.contains(pair.hyponym, pair.hypernym)) {
      throw DuplicateError("duplicate pair (" + pair.hyponym + ", " + pair.hypernym + ") at " +
                           source + ":" + std::to_string(line_no));
    }
    data.add(std::move(pair));
  }
  return data;
}

PairDataset parse_pairs(const std::filesystem::path& path, std::string name, Split split) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset " + path.string());
  if (name.empty()) name = path.stem().string();
  return read_pairs(in, path.string(), std::move(name), split);
}

void write_pairs(std::ostream& out, const PairDataset& data, bool with_provenance) {
  for (const auto& p : data.pairs()) {
    out << p.hyponym << '\t' << p.hypernym << '\t' << (p.positive ? 1 : 0);
    if (with_provenance) out << '\t' << to_string(p.provenance);
    out << '\n';
  }
}

void save_pairs(const std::filesystem::path& path, const PairDataset& data, bool with_provenance) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_pairs(out, data, with_provenance);
}

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) out.push_back(i);
  }
  return out;
}

FoldPlan stratified_folds(const PairDataset& data, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw StratificationError("k must be >= 1");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < data.size(); ++i) (data[i].positive ? pos : neg).push_back(i);
  if (pos.size() < k || neg.size() < k) {
    throw StratificationError("dataset '" + data.name() + "' has " + std::to_string(pos.size()) +
                              " positive and " + std::to_string(neg.size()) +
                              " negative pairs, need >= " + std::to_string(k) + " of each");
  }
  Rng rng(seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  FoldPlan plan{k, std::vector<std::size_t>(data.size(), 0)};
  std::size_t deal = 0;
  for (auto i : pos) plan.assignments[i] = deal++ % k;
  for (auto i : neg) plan.assignments[i] = deal++ % k;
  return plan;
}

void write_fold_plan_csv(std::ostream& out, const FoldPlan& plan) {
  out << "pair_index,fold\n";
  for (std::size_t i = 0; i < plan.assignments.size(); ++i) out << i << ',' << plan.assignments[i] << '\n';
}

FilterResult filter_to_vocabulary(const PairDataset& data, const EmbeddingSpace& space) {
  FilterResult r{PairDataset(data.name(), data.split()), 0};
  for (const auto& p : data.pairs()) {
    if (space.contains(p.hyponym) && space.contains(p.hypernym)) {
      r.dataset.add(p);
    } else {
      ++r.dropped;
    }
  }
  if (r.dropped > 0) {
    spdlog::info("{}: dropped {} pair(s) with out-of-vocabulary tokens", data.name(), r.dropped);
  }
  return r;
}

}  // namespace hyperaug

#include "hyperaug/config.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "hyperaug/errors.hpp"
#include "hyperaug/random.hpp"

namespace hyperaug {

using nlohmann::json;

std::string to_string(ClassifierKind k) { return k == ClassifierKind::lr ? "lr" : "ff"; }

ClassifierKind parse_classifier(const std::string& s) {
  if (s == "lr") return ClassifierKind::lr;
  if (s == "ff") return ClassifierKind::ff;
  throw ConfigError("unknown classifier '" + s + "' (expected lr or ff)");
}

std::string to_string(Condition c) {
  switch (c) {
    case Condition::none: return "none";
    case Condition::compose: return "compose";
    case Condition::gandalf: return "gandalf";
    case Condition::both: return "both";
    case Condition::extend: return "extend";
  }
  return "?";
}

Condition parse_condition(const std::string& s) {
  for (auto c : {Condition::none, Condition::compose, Condition::gandalf, Condition::both, Condition::extend}) {
    if (to_string(c) == s) return c;
  }
  throw ConfigError("unknown augmentation '" + s + "' (expected none, compose, gandalf, both or extend)");
}

std::string to_string(ProtocolKind p) { return p == ProtocolKind::cv ? "cv" : "split"; }

json default_config_document() {
  return json{
      {"space", {{"path", ""}, {"name", ""}}},
      {"datasets", json::array()},
      {"taxonomy_path", nullptr},
      {"compounds_path", nullptr},
      {"classifiers", {"lr", "ff"}},
      {"aggregation", "concat_asym"},
      {"augmentations", {"none"}},
      {"augmentation_amount", 0},
      {"protocol", {{"kind", "cv"}, {"folds", 10}}},
      {"train_fraction", 1.0},
      {"extension", {{"strategy", "closure_positives"}}},
      {"ff",
       {{"hidden", {200, 200, 200}},
        {"activation", "tanh"},
        {"dropout", 0.0},
        {"epochs", 30},
        {"patience", 5},
        {"validation_fraction", 0.1},
        {"learning_rate", 0.01},
        {"batch_size", 64}}},
      {"lr", {{"l2_strength", nullptr}, {"tol", 1e-6}, {"max_iter", 1000}}},
      {"compose", {{"mode", "additive"}, {"include_transitive", true}, {"negative_strategy", "none"}}},
      {"gan",
       {{"mode", "conditional"},
        {"noise_dim", 0},
        {"learning_rate", 0.0002},
        {"beta1", 0.5},
        {"beta2", 0.999},
        {"dropout_rate", 0.3},
        {"real_label_range", {0.7, 1.0}},
        {"fake_label_range", {0.0, 0.3}},
        {"label_flip_prob", 0.05},
        {"init_std", 0.02},
        {"batch_size", 64},
        {"steps", 2000}}},
      {"tuning",
       {{"enabled", false},
        {"staged", false},
        {"folds", 10},
        {"hidden", {{200, 200, 200}, {200, 100, 50}, {200, 50, 30}}},
        {"activations", {"tanh", "relu"}},
        {"dropouts", {0.0, 0.1, 0.3}},
        {"aggregations", {"diff", "asym", "concat_asym"}}}},
      {"seed", 0},
      {"threads", 1},
      {"output_dir", "results"},
  };
}

namespace {

// Keys whose value may be null in the defaults and a string when set.
bool nullable_path(const std::string& pointer) {
  return pointer == "/taxonomy_path" || pointer == "/compounds_path" || pointer == "/lr/l2_strength";
}

void overlay(json& base, const json& user, const std::string& pointer) {
  if (!user.is_object()) throw ConfigError("config" + pointer + " must be an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = pointer + "/" + it.key();
    if (!base.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
    json& slot = base[it.key()];
    if (slot.is_object()) {
      overlay(slot, it.value(), key);
    } else {
      const bool numeric_ok = slot.is_number() && it.value().is_number();
      const bool same = slot.type() == it.value().type() || numeric_ok;
      if (!same && !(nullable_path(key) && (it.value().is_null() || it.value().is_string() || it.value().is_number()))) {
        throw ConfigError("config key '" + key + "' has the wrong type");
      }
      slot = it.value();
    }
  }
}

template <class T>
T get(const json& doc, const std::string& pointer) {
  try {
    return doc.at(json::json_pointer(pointer)).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("config key '" + pointer + "': " + e.what());
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

LabelRange label_range(const json& doc, const std::string& pointer) {
  const auto v = get<std::vector<double>>(doc, pointer);
  if (v.size() != 2) throw ConfigError("config key '" + pointer + "' must be [lo, hi]");
  return {v[0], v[1]};
}

// Library parse errors become config errors naming the key.
template <class F>
auto parse_key(const std::string& pointer, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw ConfigError("config key '" + pointer + "': " + e.what());
  }
}

}  // namespace

ExperimentConfig build_config(const json& user, const std::filesystem::path& base_dir) {
  json doc = default_config_document();
  overlay(doc, user, "");

  ExperimentConfig c;
  c.space_path = resolve(base_dir, get<std::string>(doc, "/space/path"));
  c.space_name = get<std::string>(doc, "/space/name");
  if (c.space_name.empty()) c.space_name = c.space_path.stem().string();

  const auto& datasets = doc.at("datasets");
  if (!datasets.is_array()) throw ConfigError("config key '/datasets' must be an array");
  for (const auto& d : datasets) {
    for (auto it = d.begin(); it != d.end(); ++it) {
      if (it.key() != "name" && it.key() != "path" && it.key() != "test_path") {
        throw ConfigError("unknown config key '/datasets/" + it.key() + "'");
      }
    }
    DatasetSource src;
    src.path = resolve(base_dir, get<std::string>(d, "/path"));
    src.name = d.contains("name") ? get<std::string>(d, "/name") : src.path.stem().string();
    if (d.contains("test_path") && !d.at("test_path").is_null()) {
      src.test_path = resolve(base_dir, get<std::string>(d, "/test_path"));
    }
    for (const auto& other : c.datasets) {
      if (other.name == src.name) throw ConfigError("duplicate dataset name '" + src.name + "'");
    }
    c.datasets.push_back(std::move(src));
  }
  if (!doc.at("taxonomy_path").is_null()) c.taxonomy_path = resolve(base_dir, get<std::string>(doc, "/taxonomy_path"));
  if (!doc.at("compounds_path").is_null()) {
    c.compounds_path = resolve(base_dir, get<std::string>(doc, "/compounds_path"));
  }
  for (const auto& s : get<std::vector<std::string>>(doc, "/classifiers")) c.classifiers.push_back(parse_classifier(s));
  c.aggregation = parse_key("/aggregation", [&] { return parse_aggregation(get<std::string>(doc, "/aggregation")); });
  for (const auto& s : get<std::vector<std::string>>(doc, "/augmentations")) {
    const auto cond = parse_condition(s);
    if (std::find(c.conditions.begin(), c.conditions.end(), cond) != c.conditions.end()) {
      throw ConfigError("augmentation '" + s + "' listed twice");
    }
    c.conditions.push_back(cond);
  }
  // The baseline is always part of the matrix, and always first.
  std::erase(c.conditions, Condition::none);
  c.conditions.insert(c.conditions.begin(), Condition::none);
  c.augmentation_amount = get<std::size_t>(doc, "/augmentation_amount");

  const auto protocol = get<std::string>(doc, "/protocol/kind");
  if (protocol == "cv") {
    c.protocol = ProtocolKind::cv;
  } else if (protocol == "split") {
    c.protocol = ProtocolKind::split;
  } else {
    throw ConfigError("config key '/protocol/kind' must be cv or split");
  }
  c.folds = get<std::size_t>(doc, "/protocol/folds");
  c.train_fraction = get<double>(doc, "/train_fraction");
  c.extension_strategy = parse_key("/extension/strategy", [&] {
    return parse_extension_strategy(get<std::string>(doc, "/extension/strategy"));
  });

  const auto hidden = get<std::vector<std::size_t>>(doc, "/ff/hidden");
  if (hidden.size() != 3) throw ConfigError("config key '/ff/hidden' needs exactly 3 sizes");
  c.ff.hidden_sizes = {hidden[0], hidden[1], hidden[2]};
  c.ff.activation = parse_key("/ff/activation", [&] { return nn::parse_activation(get<std::string>(doc, "/ff/activation")); });
  c.ff.dropout = get<double>(doc, "/ff/dropout");
  c.ff.aggregation = c.aggregation;
  c.train.epochs = get<std::size_t>(doc, "/ff/epochs");
  c.train.early_stop_patience = get<std::size_t>(doc, "/ff/patience");
  if (c.train.early_stop_patience == 0) c.train.early_stop_patience = kNoEarlyStop;
  c.train.validation_fraction = get<double>(doc, "/ff/validation_fraction");
  c.train.learning_rate = get<double>(doc, "/ff/learning_rate");
  c.train.batch_size = get<std::size_t>(doc, "/ff/batch_size");

  if (!doc.at("lr").at("l2_strength").is_null()) c.lr.l2_strength = get<double>(doc, "/lr/l2_strength");
  c.lr.tol = get<double>(doc, "/lr/tol");
  c.lr.max_iter = get<std::size_t>(doc, "/lr/max_iter");

  c.compose_mode = parse_key("/compose/mode", [&] { return parse_compose_mode(get<std::string>(doc, "/compose/mode")); });
  c.compose_include_transitive = get<bool>(doc, "/compose/include_transitive");
  c.compose_negatives = parse_key("/compose/negative_strategy", [&] {
    return parse_compose_negatives(get<std::string>(doc, "/compose/negative_strategy"));
  });

  c.gan.mode = parse_key("/gan/mode", [&] { return parse_gan_mode(get<std::string>(doc, "/gan/mode")); });
  c.gan.noise_dim = get<std::size_t>(doc, "/gan/noise_dim");
  c.gan.learning_rate = get<double>(doc, "/gan/learning_rate");
  c.gan.beta1 = get<double>(doc, "/gan/beta1");
  c.gan.beta2 = get<double>(doc, "/gan/beta2");
  c.gan.dropout_rate = get<double>(doc, "/gan/dropout_rate");
  c.gan.real_label_range = label_range(doc, "/gan/real_label_range");
  c.gan.fake_label_range = label_range(doc, "/gan/fake_label_range");
  c.gan.label_flip_prob = get<double>(doc, "/gan/label_flip_prob");
  c.gan.init_std = get<double>(doc, "/gan/init_std");
  c.gan.batch_size = get<std::size_t>(doc, "/gan/batch_size");
  c.gan.steps = get<std::size_t>(doc, "/gan/steps");
  parse_key("/gan", [&] {
    c.gan.validate();
    return 0;
  });

  c.tuning.enabled = get<bool>(doc, "/tuning/enabled");
  c.tuning.staged = get<bool>(doc, "/tuning/staged");
  c.tuning.folds = get<std::size_t>(doc, "/tuning/folds");
  for (const auto& h : get<std::vector<std::vector<std::size_t>>>(doc, "/tuning/hidden")) {
    if (h.size() != 3) throw ConfigError("config key '/tuning/hidden' entries need exactly 3 sizes");
    c.tuning.hidden.push_back({h[0], h[1], h[2]});
  }
  for (const auto& a : get<std::vector<std::string>>(doc, "/tuning/activations")) {
    c.tuning.activations.push_back(parse_key("/tuning/activations", [&] { return nn::parse_activation(a); }));
  }
  c.tuning.dropouts = get<std::vector<double>>(doc, "/tuning/dropouts");
  for (const auto& a : get<std::vector<std::string>>(doc, "/tuning/aggregations")) {
    c.tuning.aggregations.push_back(parse_key("/tuning/aggregations", [&] { return parse_aggregation(a); }));
  }

  c.seed = get<std::uint64_t>(doc, "/seed");
  c.threads = std::max<std::size_t>(1, get<std::size_t>(doc, "/threads"));
  c.output_dir = resolve(base_dir, get<std::string>(doc, "/output_dir"));

  // Invariants.
  if (c.space_path.empty()) throw ConfigError("config key '/space/path' is required");
  if (c.datasets.empty()) throw ConfigError("config key '/datasets' needs at least one dataset");
  if (c.classifiers.empty()) throw ConfigError("config key '/classifiers' is empty");
  auto uses = [&](Condition x) { return std::find(c.conditions.begin(), c.conditions.end(), x) != c.conditions.end(); };
  if ((uses(Condition::compose) || uses(Condition::both)) && (!c.compounds_path || !c.taxonomy_path)) {
    throw ConfigError("augmentation 'compose' requires compounds_path and taxonomy_path");
  }
  if (uses(Condition::extend) && !c.taxonomy_path) throw ConfigError("augmentation 'extend' requires taxonomy_path");
  if ((uses(Condition::gandalf) || uses(Condition::both)) && c.gan.steps == 0) {
    throw ConfigError("augmentation 'gandalf' requires gan.steps >= 1 to train a generator");
  }
  if (c.protocol == ProtocolKind::cv) {
    if (c.folds < 2) throw ConfigError("config key '/protocol/folds' must be >= 2");
    for (const auto& d : c.datasets) {
      if (d.test_path) throw ConfigError("dataset '" + d.name + "' has a test_path but protocol is cv");
    }
  } else {
    for (const auto& d : c.datasets) {
      if (!d.test_path) throw ConfigError("dataset '" + d.name + "' needs a test_path under protocol split");
    }
  }
  if (!(c.train_fraction > 0.0 && c.train_fraction <= 1.0)) {
    throw ConfigError("config key '/train_fraction' must be in (0, 1]");
  }
  if (!(c.ff.dropout >= 0.0 && c.ff.dropout < 1.0)) throw ConfigError("config key '/ff/dropout' must be in [0, 1)");
  if (!(c.train.validation_fraction > 0.0 && c.train.validation_fraction < 1.0)) {
    throw ConfigError("config key '/ff/validation_fraction' must be in (0, 1)");
  }
  if (c.train.epochs == 0 || c.train.batch_size == 0) throw ConfigError("ff epochs and batch_size must be >= 1");
  if (c.tuning.enabled && (c.tuning.hidden.empty() || c.tuning.activations.empty() || c.tuning.dropouts.empty() ||
                           c.tuning.aggregations.empty())) {
    throw ConfigError("tuning grid has an empty axis");
  }

  c.document = doc;
  json hashed = doc;
  hashed.erase("output_dir");
  hashed.erase("threads");
  c.hash = fmt::format("{:016x}", hash_string(hashed.dump()));
  return c;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  std::string pointer;
  std::istringstream keys(assignment.substr(0, eq));
  for (std::string part; std::getline(keys, part, '.');) {
    if (part.empty()) throw ConfigError("override '" + assignment + "' has an empty key segment");
    pointer += "/" + part;
  }
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  doc[json::json_pointer(pointer)] = value;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json user = json::parse(in, nullptr, false);
  if (user.is_discarded()) throw ConfigError(path.string() + " is not valid JSON");
  for (const auto& o : overrides) apply_override(user, o);
  return build_config(user, path.parent_path());
}

}  // namespace hyperaug

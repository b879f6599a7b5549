#include "ffa/cli/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "ffa/data/io.hpp"
#include "ffa/error.hpp"
#include "ffa/numerics/random.hpp"

namespace ffa::cli {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string digest_hex(std::uint64_t value) {
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, value >>= 4) out[static_cast<std::size_t>(i)] = hex[value & 0xf];
  return out;
}

namespace {

// Walks one JSON object, remembering which keys were read so leftovers can
// be reported as unknown.
class Section {
 public:
  Section(const ordered_json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  template <class T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!node_.contains(key)) return fallback;
    return convert<T>(node_.at(key), key);
  }

  template <class T>
  T require(const std::string& key) {
    seen_.insert(key);
    if (!node_.contains(key)) throw ConfigError(where(key) + ": missing required key");
    return convert<T>(node_.at(key), key);
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    static const ordered_json empty = ordered_json::object();
    return Section(node_.contains(key) ? node_.at(key) : empty, where(key));
  }

  const ordered_json& raw(const std::string& key) {
    seen_.insert(key);
    return node_.at(key);
  }

  std::string where(const std::string& key = "") const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(where(it.key()) + ": unknown key");
    }
  }

 private:
  template <class T>
  T convert(const ordered_json& v, const std::string& key) const {
    try {
      if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
        if (!v.is_number_unsigned()) throw ConfigError("expected a non-negative integer");
      } else if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError("expected a number");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError("expected true or false");
      } else if constexpr (std::is_same_v<T, int>) {
        if (!v.is_number_integer()) throw ConfigError("expected an integer");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError("expected a string");
      }
      return v.get<T>();
    } catch (const ConfigError& e) {
      throw ConfigError(where(key) + ": " + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  const ordered_json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<std::size_t> sizes(Section& s, const std::string& key, std::vector<std::size_t> fallback) {
  auto v = s.get<std::vector<std::size_t>>(key, std::move(fallback));
  for (auto x : v) {
    if (x == 0) throw ConfigError(s.where(key) + ": layer widths must be positive");
  }
  return v;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

fs::path existing(const fs::path& base, Section& s, const std::string& key) {
  auto p = resolve(base, s.require<std::string>(key));
  if (!fs::exists(p)) throw ConfigError(s.where(key) + ": file not found: " + p.string());
  return p;
}

gan::LossWeights read_weights(Section s) {
  gan::LossWeights w;
  w.clf = s.get("clf", w.clf);
  w.perturb = s.get("perturb", w.perturb);
  w.mask = s.get("mask", w.mask);
  s.finish();
  try {
    w.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(s.where() + ": " + e.what());
  }
  return w;
}

data::FeatureSchema read_schema(Section s) {
  std::vector<data::FeatureSpec> features;
  if (s.has("features")) {
    const auto& list = s.raw("features");
    if (!list.is_array()) throw ConfigError(s.where("features") + ": expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      Section f(list[i], s.where("features") + "[" + std::to_string(i) + "]");
      data::FeatureSpec spec;
      spec.name = f.get<std::string>("name", "f" + std::to_string(i));
      const auto kind = f.get<std::string>("kind", "continuous");
      if (kind == "continuous") {
        spec.kind = data::FeatureKind::continuous;
      } else if (kind == "symbolic") {
        spec.kind = data::FeatureKind::symbolic;
      } else {
        throw ConfigError(f.where("kind") + ": expected continuous or symbolic");
      }
      spec.is_mutable = f.get("mutable", spec.kind == data::FeatureKind::continuous);
      f.finish();
      features.push_back(std::move(spec));
    }
  } else {
    const auto d = s.require<std::size_t>("dimension");
    const auto frozen = s.get<std::vector<std::size_t>>("frozen", {});
    const auto symbolic = s.get<std::vector<std::size_t>>("symbolic", {});
    for (std::size_t i = 0; i < d; ++i) {
      data::FeatureSpec spec;
      spec.name = "f" + std::to_string(i);
      const bool is_sym = std::find(symbolic.begin(), symbolic.end(), i) != symbolic.end();
      spec.kind = is_sym ? data::FeatureKind::symbolic : data::FeatureKind::continuous;
      spec.is_mutable = !is_sym && std::find(frozen.begin(), frozen.end(), i) == frozen.end();
      features.push_back(std::move(spec));
    }
    for (auto i : frozen) {
      if (i >= d) throw ConfigError(s.where("frozen") + ": index out of range");
    }
    for (auto i : symbolic) {
      if (i >= d) throw ConfigError(s.where("symbolic") + ": index out of range");
    }
  }
  auto classes = s.get<std::vector<std::string>>("class_names", {});
  s.finish();
  return data::FeatureSchema(std::move(features), std::move(classes));
}

void set_path(ordered_json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "': expected key.path=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  ordered_json value = ordered_json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  ordered_json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override '" + assignment + "': empty key segment");
    if (!node->is_object()) throw ConfigError("override '" + assignment + "': '" + part + "' is not inside an object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = ordered_json::object();
    start = dot + 1;
  }
}

}  // namespace

gan::PhaseSchedule ScheduleConfig::build() const {
  if (!phases.empty()) return gan::PhaseSchedule(phases, stop);
  if (!ladder.empty()) return gan::PhaseSchedule::scaled(stop, ladder);
  return gan::PhaseSchedule::scaled(stop);
}

RunConfig parse_config(const ordered_json& doc, const fs::path& base_dir) {
  RunConfig c;
  c.effective = doc;
  Section root(doc, "");
  c.seed = root.require<std::uint64_t>("seed");
  c.output_dir = root.get<std::string>("output_dir", c.output_dir.string());

  {
    auto d = root.child("data");
    const auto source = d.get<std::string>("source", "synthetic");
    c.data.train_fraction = d.get("train_fraction", c.data.train_fraction);
    c.data.stratified = d.get("stratified", c.data.stratified);
    if (!(c.data.train_fraction > 0.0 && c.data.train_fraction < 1.0)) {
      throw ConfigError(d.where("train_fraction") + ": must lie in (0,1)");
    }
    if (source == "synthetic") {
      c.data.source = DataSource::synthetic;
      auto s = d.child("synthetic");
      auto& sp = c.data.synthetic;
      sp.samples = s.get("samples", sp.samples);
      sp.dimension = s.get("dimension", sp.dimension);
      sp.mutable_count = s.get("mutable_count", sp.mutable_count);
      sp.margin = s.get("margin", sp.margin);
      sp.informative = s.get("informative", sp.informative);
      sp.seed = c.seed;
      s.finish();
    } else if (source == "tabular") {
      c.data.source = DataSource::tabular;
      auto t = d.child("tabular");
      c.data.tabular.path = existing(base_dir, t, "path");
      const auto delim = t.get<std::string>("delimiter", ",");
      if (delim.size() != 1) throw ConfigError(t.where("delimiter") + ": must be one character");
      c.data.tabular.delimiter = delim[0];
      c.data.tabular.schema = read_schema(t.child("schema"));
      t.finish();
    } else if (source == "idx") {
      c.data.source = DataSource::idx;
      auto t = d.child("idx");
      auto& ix = c.data.idx;
      ix.train_images = existing(base_dir, t, "train_images");
      if (t.has("train_labels")) ix.train_labels = existing(base_dir, t, "train_labels");
      if (t.has("test_images")) ix.test_images = existing(base_dir, t, "test_images");
      if (t.has("test_labels")) ix.test_labels = existing(base_dir, t, "test_labels");
      if (t.has("train_limit")) ix.train_limit = t.get<std::size_t>("train_limit", 0);
      if (t.has("test_limit")) ix.test_limit = t.get<std::size_t>("test_limit", 0);
      if (!ix.train_labels) throw ConfigError(t.where("train_labels") + ": required for training");
      if (ix.test_images.has_value() != ix.test_labels.has_value()) {
        throw ConfigError(t.where() + ": test_images and test_labels go together");
      }
      t.finish();
    } else {
      throw ConfigError(d.where("source") + ": expected synthetic, tabular or idx");
    }
    d.finish();
  }

  {
    auto t = root.child("target");
    try {
      c.target_kind = targets::target_kind_from_string(t.get<std::string>("kind", "mlp"));
    } catch (const Error& e) {
      throw ConfigError(t.where("kind") + ": " + e.what());
    }
    auto& hp = c.target;
    hp.hidden = sizes(t, "hidden", hp.hidden);
    hp.learning_rate = t.get("learning_rate", hp.learning_rate);
    hp.epochs = t.get("epochs", hp.epochs);
    hp.batch_size = t.get("batch_size", hp.batch_size);
    hp.max_depth = t.get("max_depth", hp.max_depth);
    hp.min_samples_split = t.get("min_samples_split", hp.min_samples_split);
    hp.min_samples_leaf = t.get("min_samples_leaf", hp.min_samples_leaf);
    hp.seed = c.seed;
    t.finish();
  }

  {
    auto g = root.child("goal");
    const auto mode = g.get<std::string>("mode", "targeted");
    const int attack_class = g.get("attack_class", 1);
    // Read in both modes so switching mode by override keeps the file valid.
    const int target_class = g.get("target_class", 0);
    if (mode == "targeted") {
      c.goal = attack::AttackGoal::targeted(attack_class, target_class);
    } else if (mode == "untargeted") {
      c.goal = attack::AttackGoal::untargeted(attack_class);
    } else {
      throw ConfigError(g.where("mode") + ": expected targeted or untargeted");
    }
    g.finish();
  }

  {
    auto k = root.child("constraints");
    auto& ct = c.constraints;
    ct.max_changed = k.get("max_changed", ct.max_changed);
    ct.max_amplitude = k.get("max_amplitude", ct.max_amplitude);
    ct.dead_zone = k.get("dead_zone", ct.dead_zone);
    ct.truncate_top_k = k.get("truncate_top_k", ct.truncate_top_k);
    k.finish();
    try {
      ct.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(k.where() + ": " + e.what());
    }
  }

  {
    auto g = root.child("generator");
    c.generator.encoder_hidden = sizes(g, "encoder_hidden", c.generator.encoder_hidden);
    c.generator.head_hidden = sizes(g, "head_hidden", c.generator.head_hidden);
    c.generator.mask_bias_init = g.get("mask_bias_init", c.generator.mask_bias_init);
    c.generator.max_amplitude = c.constraints.max_amplitude;
    g.finish();
    auto d = root.child("discriminator");
    c.discriminator_hidden = sizes(d, "hidden", c.discriminator_hidden);
    d.finish();
  }

  {
    auto t = root.child("training");
    auto& o = c.training;
    o.batch_size = t.get("batch_size", o.batch_size);
    o.steps_per_epoch = t.get("steps_per_epoch", o.steps_per_epoch);
    o.generator_lr = t.get("generator_lr", o.generator_lr);
    o.discriminator_lr = t.get("discriminator_lr", o.discriminator_lr);
    o.warm_start_epochs = t.get("warm_start_epochs", o.warm_start_epochs);
    o.validation_fraction = t.get("validation_fraction", o.validation_fraction);
    o.validation_cap = t.get("validation_cap", o.validation_cap);
    o.dead_zone = c.constraints.dead_zone;
    o.seed = c.seed;
    t.finish();
    if (o.batch_size == 0 || o.steps_per_epoch == 0) {
      throw ConfigError(t.where() + ": batch_size and steps_per_epoch must be positive");
    }
    if (!(o.generator_lr > 0.0 && o.discriminator_lr > 0.0)) {
      throw ConfigError(t.where() + ": learning rates must be positive");
    }
  }

  {
    auto s = root.child("schedule");
    auto& st = c.schedule.stop;
    st.max_epochs = s.get("max_epochs", st.max_epochs);
    st.bypass_threshold = s.get("bypass_threshold", st.bypass_threshold);
    st.changed_fraction = s.get("changed_fraction", st.changed_fraction);
    if (s.has("phases") && s.has("ladder")) {
      throw ConfigError(s.where() + ": give either phases or ladder, not both");
    }
    if (s.has("phases")) {
      const auto& list = s.raw("phases");
      if (!list.is_array()) throw ConfigError(s.where("phases") + ": expected an array");
      for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string path = s.where("phases") + "[" + std::to_string(i) + "]";
        Section p(list[i], path);
        gan::Phase phase;
        phase.start_epoch = p.require<std::size_t>("start_epoch");
        phase.weights.clf = p.get("clf", phase.weights.clf);
        phase.weights.perturb = p.get("perturb", phase.weights.perturb);
        phase.weights.mask = p.get("mask", phase.weights.mask);
        p.finish();
        c.schedule.phases.push_back(phase);
      }
    }
    if (s.has("ladder")) {
      const auto& list = s.raw("ladder");
      if (!list.is_array()) throw ConfigError(s.where("ladder") + ": expected an array");
      for (std::size_t i = 0; i < list.size(); ++i) {
        c.schedule.ladder.push_back(
            read_weights(Section(list[i], s.where("ladder") + "[" + std::to_string(i) + "]")));
      }
    }
    s.finish();
    try {
      (void)c.schedule.build();
    } catch (const ConfigError& e) {
      throw ConfigError(s.where() + ": " + e.what());
    }
  }

  {
    auto k = root.child("compare");
    c.compare.samples = k.get("samples", c.compare.samples);
    auto d = k.child("de");
    auto& de = c.compare.de;
    de.budget = d.get("budget", de.budget);
    de.population = d.get("population", de.population);
    de.iterations = d.get("iterations", de.iterations);
    de.differential_weight = d.get("differential_weight", de.differential_weight);
    de.crossover = d.get("crossover", de.crossover);
    de.early_stop = d.get("early_stop", de.early_stop);
    de.max_amplitude = c.constraints.max_amplitude;
    de.seed = num::substream_seed(c.seed, "de");
    d.finish();
    k.finish();
    if (c.compare.samples == 0) throw ConfigError(k.where("samples") + ": must be positive");
  }

  {
    auto g = root.child("grad_check");
    c.grad_check.seeds = g.get("seeds", c.grad_check.seeds);
    c.grad_check.tolerance = g.get("tolerance", c.grad_check.tolerance);
    c.grad_check.step = g.get("step", c.grad_check.step);
    g.finish();
  }
  root.finish();

  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') {
    c.output_dir = env;
  }
  return c;
}

RunConfig load_config(const fs::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string bytes = buf.str();
  ordered_json doc = ordered_json::parse(bytes, nullptr, false, true);
  if (doc.is_discarded()) throw ConfigError(path.string() + ": not valid JSON");

  std::string hashed = bytes;
  for (const auto& o : overrides) {
    set_path(doc, o);
    hashed += "\n" + o;
  }
  RunConfig c = parse_config(doc, path.has_parent_path() ? path.parent_path() : fs::path("."));
  c.digest = digest_hex(num::fnv1a(hashed));
  return c;
}

std::pair<data::Dataset, data::Dataset> load_data(const RunConfig& c) {
  const data::SplitSpec split_spec{c.data.train_fraction, c.seed, c.data.stratified};
  switch (c.data.source) {
    case DataSource::synthetic:
      return data::split(data::synth_tabular(c.data.synthetic), split_spec);
    case DataSource::tabular: {
      auto raw = data::load_tabular(c.data.tabular.path, c.data.tabular.schema,
                                    c.data.tabular.delimiter);
      auto [train, test] = data::split(raw, split_spec);
      const auto scaler = data::fit_minmax(train);
      return {data::scale_minmax(train, scaler), data::scale_minmax(test, scaler)};
    }
    case DataSource::idx: {
      const auto& ix = c.data.idx;
      auto train = data::load_idx_images(ix.train_images, ix.train_labels, ix.train_limit);
      if (ix.test_images) {
        return {std::move(train), data::load_idx_images(*ix.test_images, ix.test_labels, ix.test_limit)};
      }
      return data::split(train, split_spec);
    }
  }
  throw ConfigError("unknown data source");
}

}  // namespace ffa::cli

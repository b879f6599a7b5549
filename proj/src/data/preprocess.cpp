#include "ffa/data/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "ffa/error.hpp"
#include "ffa/numerics/random.hpp"

namespace ffa::data {

MinMaxScaler fit_minmax(const Dataset& train) {
  if (train.empty()) throw ContractError("fit_minmax: empty dataset");
  const std::size_t d = train.dimension();
  MinMaxScaler s;
  s.min.assign(d, INFINITY);
  s.max.assign(d, -INFINITY);
  for (const auto& smp : train.samples()) {
    for (std::size_t j = 0; j < d; ++j) {
      s.min[j] = std::min(s.min[j], smp.features[j]);
      s.max[j] = std::max(s.max[j], smp.features[j]);
    }
  }
  return s;
}

Dataset scale_minmax(const Dataset& dataset, const MinMaxScaler& scaler) {
  if (scaler.min.size() != dataset.dimension()) {
    throw DimensionError("scaler fitted on " + std::to_string(scaler.min.size()) +
                         " features, dataset has " + std::to_string(dataset.dimension()));
  }
  std::vector<Sample> out = dataset.samples();
  for (auto& s : out) {
    for (std::size_t j = 0; j < s.features.size(); ++j) s.features[j] = scaler.apply(j, s.features[j]);
  }
  Dataset scaled(dataset.schema(), dataset.class_count(), std::move(out));
  scaled.set_scaler(scaler);
  return scaled;
}

Dataset scale_minmax(const Dataset& dataset) { return scale_minmax(dataset, fit_minmax(dataset)); }

std::pair<Dataset, Dataset> split(const Dataset& dataset, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0,1)");
  }
  if (dataset.empty()) throw ContractError("split: empty dataset");
  auto rng = num::make_rng(spec.seed, "split");
  std::vector<std::size_t> train_idx, test_idx;

  auto take = [&](std::vector<std::size_t> idx) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_train = static_cast<std::size_t>(
        std::llround(spec.train_fraction * static_cast<double>(idx.size())));
    train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + static_cast<long>(n_train));
    test_idx.insert(test_idx.end(), idx.begin() + static_cast<long>(n_train), idx.end());
  };

  if (spec.stratified) {
    std::map<int, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < dataset.size(); ++i) by_label[dataset[i].label].push_back(i);
    for (auto& [label, idx] : by_label) take(std::move(idx));
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    std::shuffle(test_idx.begin(), test_idx.end(), rng);
  } else {
    std::vector<std::size_t> all(dataset.size());
    std::iota(all.begin(), all.end(), 0);
    take(std::move(all));
  }
  return {dataset.subset(train_idx), dataset.subset(test_idx)};
}

Dataset synth_tabular(const SynthSpec& spec) {
  if (spec.mutable_count > spec.dimension) {
    throw ConfigError("mutable count exceeds dimension");
  }
  if (spec.samples < 2 || spec.dimension == 0) throw ConfigError("synth: need n >= 2 and d >= 1");
  auto rng = num::make_rng(spec.seed, "synth");
  const std::size_t d = spec.dimension;

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> mut(order.begin(), order.begin() + static_cast<long>(spec.mutable_count));
  std::sort(mut.begin(), mut.end());

  std::vector<std::size_t> informative = mut;
  std::shuffle(informative.begin(), informative.end(), rng);
  informative.resize(std::min(spec.informative, informative.size()));

  std::vector<double> shift(d, 0.0);
  std::bernoulli_distribution coin(0.5);
  for (auto j : informative) shift[j] = (coin(rng) ? 0.5 : -0.5) * spec.margin;

  std::vector<FeatureSpec> features(d);
  for (std::size_t j = 0; j < d; ++j) {
    const bool is_mut = std::binary_search(mut.begin(), mut.end(), j);
    features[j].name = (is_mut ? "c" : "s") + std::to_string(j);
    features[j].kind = is_mut ? FeatureKind::continuous : FeatureKind::symbolic;
    features[j].is_mutable = is_mut;
  }

  std::vector<int> labels(spec.samples);
  for (std::size_t i = 0; i < spec.samples; ++i) labels[i] = i < spec.samples / 2 ? 0 : 1;
  std::shuffle(labels.begin(), labels.end(), rng);

  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_int_distribution<int> category(0, 4);
  std::vector<Sample> samples(spec.samples);
  for (std::size_t i = 0; i < spec.samples; ++i) {
    auto& s = samples[i];
    s.label = labels[i];
    s.features.resize(d);
    const double sign = s.label == 1 ? 1.0 : -1.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (features[j].kind == FeatureKind::symbolic) {
        s.features[j] = category(rng);
      } else {
        s.features[j] = noise(rng) + sign * shift[j];
      }
    }
  }
  Dataset raw(FeatureSchema(std::move(features)), 2, std::move(samples));
  return scale_minmax(raw);
}

}  // namespace ffa::data

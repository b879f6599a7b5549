#pragma once

#include <cstdint>
#include <utility>

#include "ffa/data/dataset.hpp"

namespace ffa::data {

MinMaxScaler fit_minmax(const Dataset& train);

// Maps every feature through `scaler` (values outside the fitted range clamp
// to [0,1]) and stores the scaler on the result.
Dataset scale_minmax(const Dataset& dataset, const MinMaxScaler& scaler);
// Fits on `dataset` itself, then scales it.
Dataset scale_minmax(const Dataset& dataset);

struct SplitSpec {
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  bool stratified = false;
};

// Seeded shuffle into disjoint (train, test) parts.
std::pair<Dataset, Dataset> split(const Dataset& dataset, const SplitSpec& spec);

struct SynthSpec {
  std::size_t samples = 2000;
  std::size_t dimension = 20;
  std::size_t mutable_count = 16;
  // Per-feature distance between the class means, in units of the noise std.
  double margin = 4.0;
  // How many mutable features carry the class signal.
  std::size_t informative = 4;
  std::uint64_t seed = 0;
};

// Two-class Gaussian blobs scaled to [0,1]. Mutable features are continuous;
// the remaining features are non-informative symbolic codes and frozen. On
// each informative feature the class means differ by `margin` in a random
// direction. Class 1 is the attack class.
Dataset synth_tabular(const SynthSpec& spec);

}  // namespace ffa::data

#include "ffa/gan/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "ffa/error.hpp"

namespace ffa::gan {

PhaseSchedule::PhaseSchedule(std::vector<Phase> phases, StopCondition stop)
    : phases_(std::move(phases)), stop_(stop) {
  if (phases_.empty()) throw ConfigError("phase schedule is empty");
  if (phases_.front().start_epoch != 0) throw ConfigError("first phase must start at epoch 0");
  for (std::size_t i = 0; i < phases_.size(); ++i) {
    phases_[i].weights.validate();
    if (i == 0) continue;
    const auto& prev = phases_[i - 1];
    const auto& cur = phases_[i];
    if (cur.start_epoch <= prev.start_epoch) {
      throw ConfigError("phase boundaries must be strictly increasing");
    }
    if (cur.weights.mask < prev.weights.mask) {
      throw ConfigError("mask weight must not decrease across phases");
    }
    if (cur.weights.clf > prev.weights.clf) {
      throw ConfigError("classification weight must not increase across phases");
    }
  }
  if (!(stop_.bypass_threshold >= 0.0 && stop_.bypass_threshold <= 1.0)) {
    throw ConfigError("bypass threshold must lie in [0,1]");
  }
  if (!(stop_.changed_fraction > 0.0 && stop_.changed_fraction <= 1.0)) {
    throw ConfigError("changed-feature fraction bound must lie in (0,1]");
  }
  if (stop_.max_epochs == 0) throw ConfigError("max epochs must be positive");
}

std::vector<double> PhaseSchedule::boundary_fractions() { return {0.0, 0.2, 0.3, 0.4, 0.6, 0.8}; }

std::vector<LossWeights> PhaseSchedule::default_weights() {
  // Exploration first (mask term nearly off), then the mask weight ramps up
  // while the classification weight relaxes.
  return {
      {1.0, 0.01, 0.0005},
      {1.0, 0.01, 0.002},
      {1.0, 0.02, 0.005},
      {0.9, 0.02, 0.01},
      {0.8, 0.05, 0.02},
      {0.7, 0.05, 0.03},
  };
}

PhaseSchedule PhaseSchedule::scaled(const StopCondition& stop,
                                    const std::vector<LossWeights>& weights) {
  const auto fractions = boundary_fractions();
  if (weights.size() != fractions.size()) {
    throw ConfigError("scaled schedule needs " + std::to_string(fractions.size()) +
                      " weight sets");
  }
  std::vector<Phase> phases;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    const auto start = static_cast<std::size_t>(
        std::llround(fractions[i] * static_cast<double>(stop.max_epochs)));
    if (i > 0 && start <= phases.back().start_epoch) continue;  // degenerate tiny budgets
    phases.push_back({start, weights[i]});
  }
  return PhaseSchedule(std::move(phases), stop);
}

std::size_t PhaseSchedule::phase_index(std::size_t epoch) const {
  auto it = std::upper_bound(phases_.begin(), phases_.end(), epoch,
                             [](std::size_t e, const Phase& p) { return e < p.start_epoch; });
  return static_cast<std::size_t>(it - phases_.begin()) - 1;
}

const LossWeights& PhaseSchedule::weights_at(std::size_t epoch) const {
  return phases_[phase_index(epoch)].weights;
}

}  // namespace ffa::gan

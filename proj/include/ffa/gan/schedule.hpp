#pragma once

#include <cstddef>
#include <vector>

#include "ffa/gan/losses.hpp"

namespace ffa::gan {

struct Phase {
  std::size_t start_epoch = 0;
  LossWeights weights;
};

// Training halts once the validation bypass rate reaches `bypass_threshold`
// while the mean fraction of changed features (over the full dimension) is at
// most `changed_fraction`, or after `max_epochs`.
struct StopCondition {
  double bypass_threshold = 0.9;
  double changed_fraction = 0.075;
  std::size_t max_epochs = 25000;
};

// Piecewise-constant loss weights. Phases start at epoch 0 with strictly
// increasing boundaries; the mask weight never decreases and the
// classification weight never increases from one phase to the next.
class PhaseSchedule {
 public:
  PhaseSchedule(std::vector<Phase> phases, StopCondition stop);

  // Boundaries at {0, 0.2, 0.3, 0.4, 0.6, 0.8} x max_epochs (the 5000 /
  // 7500 / 10000 / 15000 / 20000 pattern of a 25000-epoch run) with the
  // default weight ladder, or with `weights` when it has six entries.
  static PhaseSchedule scaled(const StopCondition& stop,
                              const std::vector<LossWeights>& weights = default_weights());
  static std::vector<LossWeights> default_weights();
  static std::vector<double> boundary_fractions();

  const LossWeights& weights_at(std::size_t epoch) const;
  std::size_t phase_index(std::size_t epoch) const;
  const std::vector<Phase>& phases() const { return phases_; }
  const StopCondition& stop() const { return stop_; }

 private:
  std::vector<Phase> phases_;
  StopCondition stop_;
};

// Free-function form of PhaseSchedule::weights_at.
inline LossWeights schedule_weights(const PhaseSchedule& schedule, std::size_t epoch) {
  return schedule.weights_at(epoch);
}

}  // namespace ffa::gan

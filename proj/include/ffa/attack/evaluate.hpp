#pragma once

#include <cstddef>

#include "ffa/attack/goal.hpp"
#include "ffa/blackbox.hpp"
#include "ffa/data/dataset.hpp"
#include "ffa/gan/networks.hpp"
#include "ffa/numerics/tensor.hpp"

namespace ffa::attack {

struct AttackMetrics {
  std::size_t samples = 0;
  // Share of samples the black box still classifies "correctly" under the
  // goal (i.e. not fooled), before and after the attack. accuracy_after is acc*.
  double accuracy_before = 0.0;
  double accuracy_after = 0.0;
  double detection_before = 0.0;
  double detection_after = 0.0;
  double bypass = 0.0;
  double mean_changed = 0.0;
  double seconds_per_sample = 0.0;
  // Constraint audit: entries with |delta| above the amplitude cap, and the
  // share of samples changing more features than the budget allows.
  std::size_t amplitude_violations = 0;
  double budget_violation_fraction = 0.0;
};

struct Evaluation {
  AttackMetrics metrics;
  num::Tensor deltas;
  num::Tensor attacked;
};

// Scores a batch of perturbations that were produced by any attack.
// `seconds` is the total wall time spent producing them.
AttackMetrics summarize(const BlackBox& blackbox, const num::Tensor& originals,
                        const num::Tensor& deltas, const AttackConstraints& constraints,
                        const AttackGoal& goal, double seconds);

// One generator forward pass over the whole batch, then the black box on the
// originals and the attacked copies. Throws ContractError on an empty batch
// and DimensionError when the generator and data disagree.
Evaluation evaluate_attack(const gan::GeneratorNet& gen, const BlackBox& blackbox,
                           const num::Tensor& originals, const AttackConstraints& constraints,
                           const AttackGoal& goal);
Evaluation evaluate_attack(const gan::GeneratorNet& gen, const BlackBox& blackbox,
                           const data::Dataset& originals, const AttackConstraints& constraints,
                           const AttackGoal& goal);

}  // namespace ffa::attack

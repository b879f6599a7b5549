#pragma once

#include "ffa/attack/goal.hpp"
#include "ffa/gan/networks.hpp"
#include "ffa/numerics/tape.hpp"

namespace ffa::gan {

struct LossWeights {
  double clf = 1.0;
  double perturb = 0.0;
  double mask = 0.0;

  // Throws ConfigError on a negative or all-zero weight set.
  void validate() const;
  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

struct LossBreakdown {
  double l_clf = 0.0;
  double l_perturb = 0.0;         // mean |delta| over batch and mutable features
  double l_mask_surrogate = 0.0;  // mean over batch of sum_i m_i / (m_i + beta)
  double l_mask_l0 = 0.0;         // mean over batch of #{|delta_i| > dead zone}; reported only
  double total = 0.0;
};

// Smoothing constant of the mask sparsity surrogate.
inline constexpr double kMaskSurrogateBeta = 0.01;
// Untargeted attacks maximize cross-entropy against the attack class up to this ceiling.
inline constexpr double kUntargetedCeiling = 10.0;

double weighted_total(const LossWeights& w, double l_clf, double l_perturb, double l_mask);

// Evaluates every loss term from plain tensors. `delta_mutable` and `mask`
// are (n x m); `disc_probs` is the substitute's (n x classes) output on the
// attacked batch.
LossBreakdown compute_losses(const num::Tensor& delta_mutable, const num::Tensor& mask,
                             const num::Tensor& disc_probs, const attack::AttackGoal& goal,
                             const LossWeights& weights, double dead_zone);

struct TapedLoss {
  num::Var total;
  LossBreakdown values;
};

// Differentiable version: classification loss from the substitute's logits on
// the attacked batch, L1 on the composed perturbation, surrogate on the mask.
TapedLoss compute_losses(const GeneratorPass& pass, num::Var disc_logits,
                         const attack::AttackGoal& goal, const LossWeights& weights,
                         double dead_zone);

}  // namespace ffa::gan

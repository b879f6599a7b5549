#include "ffa/gan/losses.hpp"

#include <algorithm>
#include <cmath>

#include "ffa/attack/perturbation.hpp"
#include "ffa/error.hpp"

namespace ffa::gan {

namespace ops = num::ops;
using num::Tensor;
using num::Var;

void LossWeights::validate() const {
  if (clf < 0.0 || perturb < 0.0 || mask < 0.0) throw ConfigError("loss weights must be >= 0");
  if (clf == 0.0 && perturb == 0.0 && mask == 0.0) throw ConfigError("loss weights are all zero");
}

double weighted_total(const LossWeights& w, double l_clf, double l_perturb, double l_mask) {
  return w.clf * l_clf + w.perturb * l_perturb + w.mask * l_mask;
}

namespace {

double mean_l0(const Tensor& delta, double dead_zone) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < delta.rows(); ++i) {
    count += attack::changed_length(delta.row_span(i), dead_zone);
  }
  return static_cast<double>(count) / static_cast<double>(delta.rows());
}

int goal_label(const attack::AttackGoal& goal) {
  return goal.mode == attack::GoalMode::targeted ? goal.target_class : goal.attack_class;
}

}  // namespace

LossBreakdown compute_losses(const Tensor& delta_mutable, const Tensor& mask,
                             const Tensor& disc_probs, const attack::AttackGoal& goal,
                             const LossWeights& weights, double dead_zone) {
  const std::size_t n = delta_mutable.rows();
  if (delta_mutable.empty() || n == 0) throw ContractError("compute_losses: empty batch");
  if (!mask.same_shape(delta_mutable) || disc_probs.rows() != n) {
    throw DimensionError("compute_losses: batch shapes disagree");
  }
  LossBreakdown out;
  const auto label = static_cast<std::size_t>(goal_label(goal));
  double clf = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ce = -std::log(std::max(disc_probs.at(i, label), 1e-300));
    clf += goal.mode == attack::GoalMode::targeted ? ce : -std::min(ce, kUntargetedCeiling);
  }
  out.l_clf = clf / static_cast<double>(n);
  double abs_sum = 0.0;
  for (double v : delta_mutable.values()) abs_sum += std::fabs(v);
  out.l_perturb = abs_sum / static_cast<double>(delta_mutable.size());
  double sur = 0.0;
  for (double m : mask.values()) sur += m / (m + kMaskSurrogateBeta);
  out.l_mask_surrogate = sur / static_cast<double>(n);
  out.l_mask_l0 = mean_l0(delta_mutable, dead_zone);
  out.total = weighted_total(weights, out.l_clf, out.l_perturb, out.l_mask_surrogate);
  return out;
}

TapedLoss compute_losses(const GeneratorPass& pass, Var disc_logits,
                         const attack::AttackGoal& goal, const LossWeights& weights,
                         double dead_zone) {
  const Tensor& delta = pass.delta_mutable.value();
  const std::size_t n = delta.rows();
  if (n == 0 || delta.empty()) throw ContractError("compute_losses: empty batch");
  if (disc_logits.value().rows() != n) throw DimensionError("compute_losses: batch shapes disagree");

  const std::vector<int> labels(n, goal_label(goal));
  Var ce = ops::softmax_cross_entropy(disc_logits, labels);
  Var clf = goal.mode == attack::GoalMode::targeted
                ? ops::mean(ce)
                : ops::scale(ops::mean(ops::minimum(ce, kUntargetedCeiling)), -1.0);
  Var l1 = ops::mean(ops::abs(pass.delta_mutable));
  Var ratio = ops::div(pass.mask, ops::add_scalar(pass.mask, kMaskSurrogateBeta));
  Var sur = ops::scale(ops::sum(ratio), 1.0 / static_cast<double>(n));

  TapedLoss out;
  out.values.l_clf = clf.value()[0];
  out.values.l_perturb = l1.value()[0];
  out.values.l_mask_surrogate = sur.value()[0];
  out.values.l_mask_l0 = mean_l0(delta, dead_zone);
  out.values.total =
      weighted_total(weights, out.values.l_clf, out.values.l_perturb, out.values.l_mask_surrogate);
  out.total = ops::add(ops::add(ops::scale(clf, weights.clf), ops::scale(l1, weights.perturb)),
                       ops::scale(sur, weights.mask));
  return out;
}

}  // namespace ffa::gan

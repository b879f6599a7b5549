#include "ffa/attack/evaluate.hpp"

#include <chrono>
#include <cmath>

#include "ffa/attack/perturbation.hpp"
#include "ffa/error.hpp"

namespace ffa::attack {

namespace {

double not_fooled(const std::vector<int>& predicted, const AttackGoal& goal) {
  std::size_t kept = 0;
  for (int p : predicted) kept += !goal.fooled(p);
  return static_cast<double>(kept) / static_cast<double>(predicted.size());
}

double detection(const std::vector<int>& predicted, int attack_class) {
  std::size_t hits = 0;
  for (int p : predicted) hits += p == attack_class;
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

}  // namespace

AttackMetrics summarize(const BlackBox& blackbox, const num::Tensor& originals,
                        const num::Tensor& deltas, const AttackConstraints& constraints,
                        const AttackGoal& goal, double seconds) {
  if (originals.empty()) throw ContractError("summarize: empty batch");
  if (!originals.same_shape(deltas) || originals.cols() != blackbox.input_dim()) {
    throw DimensionError("summarize: originals " + num::to_string(originals.shape()) +
                         ", deltas " + num::to_string(deltas.shape()) + ", black box width " +
                         std::to_string(blackbox.input_dim()));
  }
  goal.validate(blackbox.class_count());
  const std::size_t n = originals.rows();
  const auto before = predict_classes(blackbox, originals);
  const auto after = predict_classes(blackbox, apply_perturbation(originals, deltas));

  AttackMetrics m;
  m.samples = n;
  m.accuracy_before = not_fooled(before, goal);
  m.accuracy_after = not_fooled(after, goal);
  m.detection_before = detection(before, goal.attack_class);
  m.detection_after = detection(after, goal.attack_class);
  m.bypass = bypass_rate(m.detection_before, m.detection_after);
  m.seconds_per_sample = seconds / static_cast<double>(n);

  const std::size_t budget = constraints.max_changed_count(originals.cols());
  std::size_t changed_total = 0, over_budget = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = deltas.row_span(i);
    const std::size_t changed = changed_length(row, constraints.dead_zone);
    changed_total += changed;
    over_budget += changed > budget;
    for (double v : row) m.amplitude_violations += !(std::fabs(v) <= constraints.max_amplitude);
  }
  m.mean_changed = static_cast<double>(changed_total) / static_cast<double>(n);
  m.budget_violation_fraction = static_cast<double>(over_budget) / static_cast<double>(n);
  return m;
}

Evaluation evaluate_attack(const gan::GeneratorNet& gen, const BlackBox& blackbox,
                           const num::Tensor& originals, const AttackConstraints& constraints,
                           const AttackGoal& goal) {
  constraints.validate();
  if (originals.empty()) throw ContractError("evaluate_attack: empty sample set");
  if (originals.cols() != gen.dimension()) {
    throw DimensionError("evaluate_attack: generator expects " + std::to_string(gen.dimension()) +
                         " features, data has " + std::to_string(originals.cols()));
  }
  const auto start = std::chrono::steady_clock::now();
  Evaluation ev;
  ev.deltas = gen.generate(originals).delta_full;
  if (constraints.truncate_top_k) {
    truncate_top_k(ev.deltas, constraints.max_changed_count(originals.cols()));
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  ev.attacked = apply_perturbation(originals, ev.deltas);
  ev.metrics = summarize(blackbox, originals, ev.deltas, constraints, goal, seconds);
  return ev;
}

Evaluation evaluate_attack(const gan::GeneratorNet& gen, const BlackBox& blackbox,
                           const data::Dataset& originals, const AttackConstraints& constraints,
                           const AttackGoal& goal) {
  if (originals.empty()) throw ContractError("evaluate_attack: empty sample set");
  return evaluate_attack(gen, blackbox, originals.features(), constraints, goal);
}

}  // namespace ffa::attack

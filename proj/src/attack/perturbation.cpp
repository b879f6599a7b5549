#include "ffa/attack/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ffa/attack/goal.hpp"
#include "ffa/error.hpp"

namespace ffa::attack {

void AttackGoal::validate(std::size_t class_count) const {
  const auto in_range = [&](int c) { return c >= 0 && static_cast<std::size_t>(c) < class_count; };
  if (!in_range(attack_class)) throw ConfigError("attack class outside the label range");
  if (mode == GoalMode::targeted) {
    if (!in_range(target_class)) throw ConfigError("target class outside the label range");
    if (target_class == attack_class) {
      throw ConfigError("targeted goal needs a target class different from the attack class");
    }
  }
}

std::string AttackGoal::describe() const {
  if (mode == GoalMode::targeted) {
    return "targeted:" + std::to_string(attack_class) + "->" + std::to_string(target_class);
  }
  return "untargeted:" + std::to_string(attack_class);
}

void AttackConstraints::validate() const {
  if (!(max_changed > 0.0)) throw ConfigError("max_changed must be positive");
  if (!(max_amplitude > 0.0 && max_amplitude <= 1.0)) {
    throw ConfigError("max_amplitude must lie in (0,1]");
  }
  if (!(dead_zone >= 0.0)) throw ConfigError("dead_zone must be non-negative");
}

std::size_t AttackConstraints::max_changed_count(std::size_t dimension) const {
  if (max_changed >= 1.0) return static_cast<std::size_t>(max_changed);
  return static_cast<std::size_t>(std::floor(max_changed * static_cast<double>(dimension)));
}

std::vector<std::size_t> Perturbation::nonzero(double dead_zone) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < delta.size(); ++i) {
    if (std::fabs(delta[i]) > dead_zone) out.push_back(i);
  }
  return out;
}

namespace {

double compose(double x, double d) {
  if (d == 0.0) return x;
  return std::clamp(x + d, 0.0, 1.0);
}

}  // namespace

AdversarialExample apply_perturbation(const data::Sample& sample, const Perturbation& p) {
  if (sample.features.size() != p.delta.size()) {
    throw DimensionError("apply_perturbation: sample has " +
                         std::to_string(sample.features.size()) + " features, delta has " +
                         std::to_string(p.delta.size()));
  }
  AdversarialExample ex{sample, p, sample.features};
  for (std::size_t i = 0; i < p.delta.size(); ++i) {
    ex.attacked[i] = compose(sample.features[i], p.delta[i]);
  }
  return ex;
}

num::Tensor apply_perturbation(const num::Tensor& originals, const num::Tensor& deltas) {
  if (!originals.same_shape(deltas)) {
    throw DimensionError("apply_perturbation: " + num::to_string(originals.shape()) + " vs " +
                         num::to_string(deltas.shape()));
  }
  num::Tensor out = originals;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = compose(originals[k], deltas[k]);
  return out;
}

std::size_t changed_length(std::span<const double> delta, double dead_zone) {
  return static_cast<std::size_t>(
      std::count_if(delta.begin(), delta.end(), [&](double v) { return std::fabs(v) > dead_zone; }));
}

double bypass_rate(double detection_original, double detection_attacked) {
  if (!(detection_original > 0.0)) {
    throw ContractError("bypass rate undefined: originals are never detected (f(X) = 0)");
  }
  return std::max(1.0 - detection_attacked / detection_original, 0.0);
}

double bypass_rate(const BlackBox& model, const num::Tensor& originals,
                   const num::Tensor& attacked, int attack_class) {
  if (originals.rows() != attacked.rows()) {
    throw DimensionError("bypass_rate: batches differ in size");
  }
  return bypass_rate(detection_rate(model, originals, attack_class),
                     detection_rate(model, attacked, attack_class));
}

void truncate_top_k(num::Tensor& deltas, std::size_t k) {
  const std::size_t m = deltas.cols();
  if (k >= m) return;
  std::vector<std::size_t> order(m);
  for (std::size_t r = 0; r < deltas.rows(); ++r) {
    auto row = deltas.row_span(r);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return std::fabs(row[a]) > std::fabs(row[b]); });
    for (std::size_t j = k; j < m; ++j) row[order[j]] = 0.0;
  }
}

}  // namespace ffa::attack

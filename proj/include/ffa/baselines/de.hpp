#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ffa/attack/goal.hpp"
#include "ffa/attack/perturbation.hpp"
#include "ffa/blackbox.hpp"
#include "ffa/data/dataset.hpp"

namespace ffa::baselines {

// Objective minimized by every search baseline: minus the target-class
// probability for a targeted goal, the attack-class probability otherwise.
double attack_objective(std::span<const double> probabilities, const attack::AttackGoal& goal);

struct DEConfig {
  std::size_t budget = 3;  // k features set per candidate
  std::size_t population = 40;
  std::size_t iterations = 150;
  double differential_weight = 0.5;  // F
  double crossover = 0.9;            // CR
  double max_amplitude = 1.0;
  // Stop as soon as the best candidate fools the black box. Off by default
  // so the query count is always population x (iterations + 1).
  bool early_stop = false;
  std::uint64_t seed = 0;

  // Throws ConfigError on zero sizes, population < 4, F or CR out of range,
  // or a budget larger than `mutable_count`.
  void validate(std::size_t mutable_count) const;
};

// k distinct (feature index, new value) pairs.
struct CandidateSolution {
  std::vector<std::size_t> indices;
  std::vector<double> values;
  double fitness = 0.0;
};

struct DEResult {
  attack::AdversarialExample example;
  CandidateSolution best;
  std::size_t queries = 0;  // black-box rows evaluated
  std::size_t generations = 0;
  double seconds = 0.0;
  bool fooled = false;
};

// rand/1/bin differential evolution over k (position, value) genes. Each
// position gene in [0, m) is floored to a mutable feature; the value gene is
// the feature's new value, with the resulting delta capped at max_amplitude.
// Duplicate positions in a candidate collapse to the first occurrence. Every
// generation is scored with one batched predict_proba call.
DEResult de_attack(const BlackBox& blackbox, const data::Sample& sample,
                   std::span<const std::size_t> mutable_indices, const attack::AttackGoal& goal,
                   const DEConfig& config);

// Runs de_attack on every row, each with its own RNG substream derived from
// config.seed and the row index. Rows are processed in parallel; results are
// in input order and do not depend on the thread count.
std::vector<DEResult> de_attack_batch(const BlackBox& blackbox, const data::Dataset& samples,
                                      const attack::AttackGoal& goal, const DEConfig& config);

}  // namespace ffa::baselines

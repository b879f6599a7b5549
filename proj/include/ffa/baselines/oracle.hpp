#pragma once

#include <span>
#include <vector>

#include "ffa/attack/goal.hpp"
#include "ffa/blackbox.hpp"
#include "ffa/data/dataset.hpp"

namespace ffa::baselines {

inline constexpr double kOracleSingleLimit = 1e6;
inline constexpr double kOraclePairLimit = 1e7;

struct OracleResult {
  std::vector<std::size_t> indices;
  std::vector<double> values;
  double objective = 0.0;  // attack_objective of the best candidate
  int predicted = -1;
  bool fooled = false;
  std::size_t candidates = 0;
};

// Evenly spaced grid over [0,1]; 11 points gives 0, 0.1, ..., 1.
std::vector<double> default_grid(std::size_t points = 11);

// Exhaustive search: sets one mutable feature (and, with `pairs`, two
// distinct ones) to every grid value and keeps the candidate with the lowest
// attack_objective; ties keep the first in enumeration order. Throws
// ContractError with the sweep size when m x g exceeds 1e6 (single) or
// m^2 x g^2 exceeds 1e7 (pairs).
OracleResult greedy_oracle(const BlackBox& blackbox, const data::Sample& sample,
                           std::span<const std::size_t> mutable_indices,
                           const attack::AttackGoal& goal, std::span<const double> grid,
                           bool pairs = false);

}  // namespace ffa::baselines

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ffa/numerics/parameter.hpp"
#include "ffa/numerics/tape.hpp"

namespace ffa::num {

struct GradCheckReport {
  // Worst relative error per parameter, in the order given.
  std::vector<double> max_relative_error;
  double worst = 0.0;
  bool pass = false;
};

// Builds a scalar loss on the given tape; parameters must enter through
// tape.parameter() so the taped gradient reaches them.
using LossBuilder = std::function<Var(Tape&)>;

// Compares taped gradients with central differences of step `step`.
// Relative error is |analytic - numeric| / max(|analytic|, |numeric|, 1e-6).
GradCheckReport grad_check(const LossBuilder& loss, std::span<Parameter* const> params,
                           double tolerance, double step = 1e-5);

}  // namespace ffa::num

#pragma once

#include <span>
#include <string>

#include "ffa/numerics/parameter.hpp"

namespace ffa::num {

enum class OptimizerRule { sgd, adam };

OptimizerRule optimizer_rule_from_string(const std::string& name);

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Optimizer {
 public:
  Optimizer(OptimizerRule rule, double learning_rate, AdamSettings adam = {});

  // Applies one update using the gradients currently held by `params`.
  // Throws NumericError, leaving every parameter untouched, if any gradient
  // is NaN/Inf.
  void step(std::span<Parameter* const> params);

  long steps() const { return steps_; }
  double learning_rate() const { return learning_rate_; }
  OptimizerRule rule() const { return rule_; }

 private:
  OptimizerRule rule_;
  double learning_rate_;
  AdamSettings adam_;
  long steps_ = 0;
};

void zero_grad(std::span<Parameter* const> params);

}  // namespace ffa::num

#include "ffa/numerics/optim.hpp"

#include <cmath>

#include "ffa/error.hpp"

namespace ffa::num {

OptimizerRule optimizer_rule_from_string(const std::string& name) {
  if (name == "sgd") return OptimizerRule::sgd;
  if (name == "adam") return OptimizerRule::adam;
  throw ConfigError("unknown optimizer '" + name + "' (expected sgd or adam)");
}

Optimizer::Optimizer(OptimizerRule rule, double learning_rate, AdamSettings adam)
    : rule_(rule), learning_rate_(learning_rate), adam_(adam) {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
}

void Optimizer::step(std::span<Parameter* const> params) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto* p = params[i];
    if (!p->grad.same_shape(p->value)) {
      throw DimensionError("optimizer: gradient shape does not match parameter " +
                           std::to_string(i));
    }
    for (std::size_t k = 0; k < p->grad.size(); ++k) {
      if (!std::isfinite(p->grad[k])) {
        throw NumericError("optimizer: non-finite gradient in parameter " + std::to_string(i) +
                           " element " + std::to_string(k) + " (" + to_string(p->value.shape()) +
                           ")");
      }
    }
  }
  ++steps_;
  if (rule_ == OptimizerRule::sgd) {
    for (auto* p : params) {
      for (std::size_t k = 0; k < p->value.size(); ++k) p->value[k] -= learning_rate_ * p->grad[k];
    }
    return;
  }
  const double t = static_cast<double>(steps_);
  const double c1 = 1.0 - std::pow(adam_.beta1, t);
  const double c2 = 1.0 - std::pow(adam_.beta2, t);
  for (auto* p : params) {
    if (!p->first_moment.same_shape(p->value)) {
      p->first_moment = Tensor(p->value.shape(), 0.0);
      p->second_moment = Tensor(p->value.shape(), 0.0);
    }
    for (std::size_t k = 0; k < p->value.size(); ++k) {
      const double g = p->grad[k];
      double& m = p->first_moment[k];
      double& v = p->second_moment[k];
      m = adam_.beta1 * m + (1.0 - adam_.beta1) * g;
      v = adam_.beta2 * v + (1.0 - adam_.beta2) * g * g;
      const double mhat = m / c1;
      const double vhat = v / c2;
      p->value[k] -= learning_rate_ * mhat / (std::sqrt(vhat) + adam_.epsilon);
    }
  }
}

void zero_grad(std::span<Parameter* const> params) {
  for (auto* p : params) {
    if (!p->grad.same_shape(p->value)) p->grad = Tensor(p->value.shape(), 0.0);
    p->grad.fill(0.0);
  }
}

}  // namespace ffa::num

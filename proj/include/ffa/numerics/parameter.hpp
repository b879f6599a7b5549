#pragma once

#include "ffa/numerics/tensor.hpp"

namespace ffa::num {

// A trainable tensor with its gradient and optimizer state.
struct Parameter {
  Parameter() = default;
  explicit Parameter(Tensor v) : value(std::move(v)), grad(value.shape(), 0.0) {}

  void zero_grad() { grad.fill(0.0); }

  Tensor value;
  Tensor grad;
  // Adam moments; allocated on the first Adam step.
  Tensor first_moment;
  Tensor second_moment;
};

}  // namespace ffa::num

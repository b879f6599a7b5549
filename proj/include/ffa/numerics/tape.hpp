#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "ffa/numerics/parameter.hpp"
#include "ffa/numerics/tensor.hpp"

namespace ffa::num {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; valid until the tape
// is cleared or consumed by backward().
class Var {
 public:
  Var() = default;
  const Tensor& value() const;
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Reverse-mode differentiation tape. Operations append nodes in evaluation
// order, so replaying the node list backwards is a valid topological order.
class Tape {
 public:
  using BackwardFn =
      std::function<void(Tape&, const Tensor& grad_out, const Tensor& out_value)>;

  Var constant(Tensor value);
  // Leaf whose gradient is accumulated into p.grad by backward().
  Var parameter(Parameter& p);
  // Leaf that reads p.value but never receives a gradient.
  Var frozen(const Parameter& p) { return constant(p.value); }

  // Appends an interior node. `fn` receives the node's output gradient and
  // value and must accumulate into the gradients of the listed parents via
  // grad(). It is only invoked when some parent requires a gradient.
  Var record(Tensor value, std::vector<std::size_t> parents, BackwardFn fn);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  // Gradient buffer of a node, allocated (zero) on first use.
  Tensor& grad(std::size_t id);

  // Runs the reverse sweep from a scalar loss, accumulates into every reached
  // Parameter's grad and clears the tape. Returns the number of parameter
  // leaves that received a gradient; zero means the loss was detached (a
  // warning is written to std::clog in that case).
  std::size_t backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<std::size_t> parents;
    BackwardFn backward;
    Parameter* param = nullptr;
    bool requires_grad = false;
  };
  std::vector<Node> nodes_;
};

// Differentiable operations. Binary elementwise ops require equal shapes.
namespace ops {

Var matmul(Var a, Var b);
// x (n x m) + bias (1 x m) broadcast over rows.
Var add_bias(Var x, Var bias);
Var relu(Var x);
Var sigmoid(Var x);
Var tanh(Var x);
Var softmax(Var x);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var scale(Var x, double factor);
Var add_scalar(Var x, double c);
// Subgradient 0 at x = 0.
Var abs(Var x);
// Gradient passes where lo <= x <= hi, zero outside.
Var clamp(Var x, double lo, double hi);
// min(x, c) elementwise; gradient passes where x <= c.
Var minimum(Var x, double c);
Var sum(Var x);
Var mean(Var x);
// Fused softmax + cross-entropy per row; returns an (n x 1) column of losses.
Var softmax_cross_entropy(Var logits, std::span<const int> labels);
// Places the columns of x (n x m) at `columns` of an (n x width) zero matrix.
Var scatter_columns(Var x, std::span<const std::size_t> columns, std::size_t width);
Var gather_columns(Var x, std::span<const std::size_t> columns);

}  // namespace ops

}  // namespace ffa::num

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ffa/numerics/parameter.hpp"
#include "ffa/numerics/random.hpp"
#include "ffa/numerics/tape.hpp"

namespace ffa::num {

enum class Activation { identity, relu, sigmoid, tanh, softmax };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

// activation(input * weights + bias), recorded on the input's tape. With
// `trainable` false the weights enter the tape as constants.
Var layer_forward(Var input, Parameter& weights, Parameter& bias, Activation activation,
                  bool trainable = true);
Var layer_forward_frozen(Var input, const Parameter& weights, const Parameter& bias,
                         Activation activation);
// Same arithmetic without a tape; bit-identical to the taped version.
Tensor layer_forward(const Tensor& input, const Parameter& weights, const Parameter& bias,
                     Activation activation);

struct Dense {
  Parameter weights;  // (in x out)
  Parameter bias;     // (1 x out)
  Activation activation = Activation::identity;

  std::size_t in() const { return weights.value.rows(); }
  std::size_t out() const { return weights.value.cols(); }
};

// Plain feed-forward stack of Dense layers.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<Dense> layers);

  // sizes = {in, h1, ..., out}. Hidden layers use `hidden`, the last layer
  // uses `output`. Weights are uniform He (relu) or Glorot (others), biases 0.
  static Mlp build(const std::vector<std::size_t>& sizes, Activation hidden, Activation output,
                   Rng& rng);

  Var forward(Var x, bool trainable = true);
  // Taped forward with every parameter entering as a constant.
  Var forward_frozen(Var x) const;
  Tensor predict(const Tensor& x) const;

  std::vector<Parameter*> parameters();
  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::vector<Dense>& layers() { return layers_; }
  const std::vector<Dense>& layers() const { return layers_; }

  void write(std::ostream& os) const;
  static Mlp read(std::istream& is);

  friend bool operator==(const Mlp& a, const Mlp& b);

 private:
  std::vector<Dense> layers_;
};

}  // namespace ffa::num

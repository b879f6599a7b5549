#include "ffa/numerics/layers.hpp"

#include <cmath>
#include <istream>
#include <ostream>

#include "ffa/error.hpp"
#include "ffa/numerics/kernels.hpp"
#include "ffa/numerics/serialize.hpp"

namespace ffa::num {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::softmax: return "softmax";
  }
  return "identity";
}

Activation activation_from_string(const std::string& name) {
  if (name == "identity") return Activation::identity;
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "tanh") return Activation::tanh;
  if (name == "softmax") return Activation::softmax;
  throw FormatError("unknown activation '" + name + "'");
}

namespace {

void check_layer(const Tensor& input, const Parameter& w, const Parameter& b) {
  if (input.cols() != w.value.rows()) {
    throw DimensionError("layer_forward: input " + to_string(input.shape()) +
                         " does not match weights " + to_string(w.value.shape()));
  }
  if (b.value.size() != w.value.cols()) {
    throw DimensionError("layer_forward: bias " + to_string(b.value.shape()) +
                         " does not match weights " + to_string(w.value.shape()));
  }
}

Var apply_activation(Var z, Activation activation) {
  switch (activation) {
    case Activation::identity: return z;
    case Activation::relu: return ops::relu(z);
    case Activation::sigmoid: return ops::sigmoid(z);
    case Activation::tanh: return ops::tanh(z);
    case Activation::softmax: return ops::softmax(z);
  }
  return z;
}

}  // namespace

Var layer_forward(Var input, Parameter& weights, Parameter& bias, Activation activation,
                  bool trainable) {
  if (!trainable) return layer_forward_frozen(input, weights, bias, activation);
  check_layer(input.value(), weights, bias);
  auto& tape = input.tape();
  Var z = ops::add_bias(ops::matmul(input, tape.parameter(weights)), tape.parameter(bias));
  return apply_activation(z, activation);
}

Var layer_forward_frozen(Var input, const Parameter& weights, const Parameter& bias,
                         Activation activation) {
  check_layer(input.value(), weights, bias);
  auto& tape = input.tape();
  Var z = ops::add_bias(ops::matmul(input, tape.frozen(weights)), tape.frozen(bias));
  return apply_activation(z, activation);
}

Tensor layer_forward(const Tensor& input, const Parameter& weights, const Parameter& bias,
                     Activation activation) {
  check_layer(input, weights, bias);
  Tensor z = kernels::matmul(input, weights.value);
  kernels::add_bias_rows(z, bias.value);
  switch (activation) {
    case Activation::identity: break;
    case Activation::relu: kernels::relu_inplace(z); break;
    case Activation::sigmoid: kernels::sigmoid_inplace(z); break;
    case Activation::tanh: kernels::tanh_inplace(z); break;
    case Activation::softmax: kernels::softmax_rows_inplace(z); break;
  }
  return z;
}

Mlp::Mlp(std::vector<Dense> layers) : layers_(std::move(layers)) {
  for (std::size_t i = 1; i < layers_.size(); ++i) {
    if (layers_[i].in() != layers_[i - 1].out()) {
      throw DimensionError("Mlp: layer " + std::to_string(i) + " input width mismatch");
    }
  }
}

Mlp Mlp::build(const std::vector<std::size_t>& sizes, Activation hidden, Activation output,
               Rng& rng) {
  if (sizes.size() < 2) throw ConfigError("Mlp::build needs at least input and output sizes");
  std::vector<Dense> layers;
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const std::size_t in = sizes[i], out = sizes[i + 1];
    const bool last = i + 2 == sizes.size();
    Dense d;
    d.activation = last ? output : hidden;
    const double bound = d.activation == Activation::relu
                             ? std::sqrt(6.0 / static_cast<double>(in))
                             : std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Tensor w = Tensor::matrix(in, out);
    for (auto& v : w.values()) v = dist(rng);
    d.weights = Parameter(std::move(w));
    d.bias = Parameter(Tensor::matrix(1, out));
    layers.push_back(std::move(d));
  }
  return Mlp(std::move(layers));
}

Var Mlp::forward(Var x, bool trainable) {
  for (auto& l : layers_) x = layer_forward(x, l.weights, l.bias, l.activation, trainable);
  return x;
}

Var Mlp::forward_frozen(Var x) const {
  for (const auto& l : layers_) x = layer_forward_frozen(x, l.weights, l.bias, l.activation);
  return x;
}

Tensor Mlp::predict(const Tensor& x) const {
  if (layers_.empty()) return x;
  Tensor h = layer_forward(x, layers_[0].weights, layers_[0].bias, layers_[0].activation);
  for (std::size_t i = 1; i < layers_.size(); ++i) {
    h = layer_forward(h, layers_[i].weights, layers_[i].bias, layers_[i].activation);
  }
  return h;
}

std::vector<Parameter*> Mlp::parameters() {
  std::vector<Parameter*> out;
  for (auto& l : layers_) {
    out.push_back(&l.weights);
    out.push_back(&l.bias);
  }
  return out;
}

std::size_t Mlp::input_dim() const { return layers_.empty() ? 0 : layers_.front().in(); }
std::size_t Mlp::output_dim() const { return layers_.empty() ? 0 : layers_.back().out(); }

void Mlp::write(std::ostream& os) const {
  os << "layers " << layers_.size() << '\n';
  for (const auto& l : layers_) {
    os << "activation " << to_string(l.activation) << '\n';
    io::write_tensor(os, l.weights.value);
    io::write_tensor(os, l.bias.value);
  }
}

Mlp Mlp::read(std::istream& is) {
  const auto count = std::stoul(io::expect_key(is, "layers"));
  std::vector<Dense> layers;
  for (std::size_t i = 0; i < count; ++i) {
    Dense d;
    d.activation = activation_from_string(io::expect_key(is, "activation"));
    d.weights = Parameter(io::read_tensor(is));
    d.bias = Parameter(io::read_tensor(is));
    if (d.bias.value.size() != d.weights.value.cols()) throw FormatError("bias width mismatch");
    layers.push_back(std::move(d));
  }
  return Mlp(std::move(layers));
}

bool operator==(const Mlp& a, const Mlp& b) {
  if (a.layers_.size() != b.layers_.size()) return false;
  for (std::size_t i = 0; i < a.layers_.size(); ++i) {
    const auto& x = a.layers_[i];
    const auto& y = b.layers_[i];
    if (x.activation != y.activation || !(x.weights.value == y.weights.value) ||
        !(x.bias.value == y.bias.value)) {
      return false;
    }
  }
  return true;
}

}  // namespace ffa::num

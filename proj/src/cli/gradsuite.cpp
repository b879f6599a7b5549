#include "ffa/cli/gradsuite.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ffa/attack/goal.hpp"
#include "ffa/data/dataset.hpp"
#include "ffa/error.hpp"
#include "ffa/gan/losses.hpp"
#include "ffa/gan/networks.hpp"
#include "ffa/numerics/layers.hpp"
#include "ffa/numerics/random.hpp"

namespace ffa::cli {

namespace ops = num::ops;
using num::Parameter;
using num::Tensor;
using num::Var;

namespace {

Tensor uniform(std::size_t r, std::size_t c, double lo, double hi, num::Rng& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t = Tensor::matrix(r, c);
  for (auto& v : t.values()) v = u(rng);
  return t;
}

// Fresh networks start with zero biases, so a sample whose hidden layer is
// all zero lands exactly on the next ReLU kink. A small jitter avoids that.
void jitter(std::vector<Parameter*> params, num::Rng& rng) {
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (auto* p : params) {
    for (auto& v : p->value.values()) v += u(rng);
  }
}

// Central differences straddling a kink (ReLU at 0, clamp bounds, |x| at 0)
// disagree with the one-sided taped derivative. Test points closer than this
// to any kink are redrawn.
constexpr double kKinkMargin = 1e-3;
constexpr int kRedraws = 100;

// Smallest |pre-activation| of any ReLU unit of `net` over the batch.
double relu_margin(const num::Mlp& net, Tensor h) {
  double margin = INFINITY;
  for (const auto& layer : net.layers()) {
    if (layer.activation == num::Activation::relu) {
      const auto& w = layer.weights.value;
      for (std::size_t i = 0; i < h.rows(); ++i) {
        for (std::size_t k = 0; k < w.cols(); ++k) {
          double z = layer.bias.value.at(0, k);
          for (std::size_t j = 0; j < w.rows(); ++j) z += h.at(i, j) * w.at(j, k);
          margin = std::min(margin, std::fabs(z));
        }
      }
    }
    h = num::Mlp(std::vector<num::Dense>{layer}).predict(h);
  }
  return margin;
}

double generator_margin(const gan::GeneratorNet& gen, const gan::DiscriminatorNet& disc,
                        const Tensor& x) {
  const auto& mut = gen.mutable_indices();
  Tensor xm = Tensor::matrix(x.rows(), mut.size());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < mut.size(); ++j) xm.at(i, j) = x.at(i, mut[j]);
  }
  const Tensor z = gen.encoder().predict(xm);
  double margin = std::min({relu_margin(gen.encoder(), xm), relu_margin(gen.mask_head(), z),
                            relu_margin(gen.perturb_head(), z)});
  const auto out = gen.generate(x);
  const double cap = gen.max_amplitude();
  for (std::size_t k = 0; k < out.mask.size(); ++k) {
    margin = std::min(margin, std::fabs(out.perturb[k]));
    margin = std::min(margin, std::fabs(std::fabs(out.mask[k] * out.perturb[k]) - cap));
  }
  Tensor attacked = x;
  for (std::size_t k = 0; k < attacked.size(); ++k) {
    attacked[k] += out.delta_full[k];
    margin = std::min({margin, std::fabs(attacked[k]), std::fabs(attacked[k] - 1.0)});
    attacked[k] = std::clamp(attacked[k], 0.0, 1.0);
  }
  return std::min(margin, relu_margin(disc.network(), attacked));
}

std::vector<int> labels(std::size_t n, int classes, num::Rng& rng) {
  std::uniform_int_distribution<int> u(0, classes - 1);
  std::vector<int> out(n);
  for (auto& v : out) v = u(rng);
  return out;
}

num::GradCheckReport dense_case(num::Activation act, std::uint64_t seed, double tol, double step) {
  auto rng = num::make_rng(seed, "grad-dense");
  Parameter w(uniform(5, 4, -1, 1, rng));
  Parameter b(uniform(1, 4, -0.5, 0.5, rng));
  const Tensor x = uniform(6, 5, -1, 1, rng);
  const Tensor probe = uniform(6, 4, -1, 1, rng);
  std::vector<Parameter*> params{&w, &b};
  return num::grad_check(
      [&](num::Tape& t) {
        return ops::sum(ops::mul(num::layer_forward(t.constant(x), w, b, act), t.constant(probe)));
      },
      params, tol, step);
}

num::GradCheckReport cross_entropy_case(std::uint64_t seed, double tol, double step) {
  auto rng = num::make_rng(seed, "grad-ce");
  Parameter logits(uniform(7, 3, -2, 2, rng));
  const auto y = labels(7, 3, rng);
  std::vector<Parameter*> params{&logits};
  return num::grad_check(
      [&](num::Tape& t) { return ops::mean(ops::softmax_cross_entropy(t.parameter(logits), y)); },
      params, tol, step);
}

num::GradCheckReport elementwise_case(std::uint64_t seed, double tol, double step) {
  auto rng = num::make_rng(seed, "grad-elementwise");
  // Values kept away from the kinks of abs/clamp/minimum.
  Tensor a0 = uniform(4, 3, 0.1, 0.8, rng);
  std::bernoulli_distribution flip(0.5);
  for (auto& v : a0.values()) if (flip(rng)) v = -v;
  Parameter a(std::move(a0));
  Parameter b(uniform(4, 3, 0.5, 1.5, rng));
  std::vector<Parameter*> params{&a, &b};
  return num::grad_check(
      [&](num::Tape& t) {
        Var pa = t.parameter(a), pb = t.parameter(b);
        Var q = ops::div(ops::add_scalar(ops::abs(pa), 0.5), pb);
        Var r = ops::sub(ops::clamp(ops::scale(pa, 1.5), -0.9, 0.9), ops::minimum(pb, 1.0));
        Var s = ops::mul(ops::tanh(q), ops::sigmoid(r));
        return ops::add(ops::sum(s), ops::mean(ops::softmax(ops::mul(pa, pb))));
      },
      params, tol, step);
}

num::GradCheckReport distill_case(std::uint64_t seed, double tol, double step) {
  auto rng = num::make_rng(seed, "grad-distill");
  gan::DiscriminatorNet disc;
  Tensor x;
  for (int tries = 0;; ++tries) {
    if (tries == kRedraws) throw NumericError("grad-check: no kink-free distillation point");
    disc = gan::DiscriminatorNet::create(6, 3, {8, 8}, rng);
    jitter(disc.parameters(), rng);
    x = uniform(9, 6, 0, 1, rng);
    if (relu_margin(disc.network(), x) >= kKinkMargin) break;
  }
  const auto y = labels(9, 3, rng);
  auto params = disc.parameters();
  return num::grad_check(
      [&](num::Tape& t) {
        return ops::mean(ops::softmax_cross_entropy(disc.logits(t.constant(x)), y));
      },
      params, tol, step);
}

num::GradCheckReport generator_case(bool targeted, std::uint64_t seed, double tol, double step) {
  auto rng = num::make_rng(seed, targeted ? "grad-gen-targeted" : "grad-gen-untargeted");
  std::vector<data::FeatureSpec> features;
  for (std::size_t i = 0; i < 6; ++i) {
    features.push_back({"f" + std::to_string(i), data::FeatureKind::continuous, i % 3 != 0});
  }
  const data::FeatureSchema schema(features);
  gan::GeneratorShape shape;
  shape.encoder_hidden = {8, 8};
  shape.head_hidden = {6};
  shape.max_amplitude = 0.6;
  gan::GeneratorNet gen;
  gan::DiscriminatorNet disc;
  Tensor x;
  for (int tries = 0;; ++tries) {
    if (tries == kRedraws) throw NumericError("grad-check: no kink-free generator point");
    gen = gan::GeneratorNet::create(schema, shape, rng);
    jitter(gen.parameters(), rng);
    disc = gan::DiscriminatorNet::create(6, 2, {8}, rng);
    x = uniform(5, 6, 0.2, 0.8, rng);
    if (generator_margin(gen, disc, x) >= kKinkMargin) break;
  }
  const auto goal = targeted ? attack::AttackGoal::targeted(1, 0) : attack::AttackGoal::untargeted(1);
  const gan::LossWeights weights{0.9, 0.3, 0.2};
  auto params = gen.parameters();
  return num::grad_check(
      [&](num::Tape& t) {
        auto pass = gen.forward(t, x);
        Var attacked = ops::clamp(ops::add(t.constant(x), pass.delta_full), 0.0, 1.0);
        return gan::compute_losses(pass, disc.logits_frozen(attacked), goal, weights, 1e-6).total;
      },
      params, tol, step);
}

}  // namespace

std::vector<std::string> grad_case_names() {
  return {"dense-identity", "dense-relu",    "dense-sigmoid", "dense-tanh",
          "dense-softmax",  "cross-entropy", "elementwise",   "distillation",
          "generator-targeted", "generator-untargeted"};
}

std::vector<GradCase> run_grad_suite(std::uint64_t root_seed, std::size_t seeds, double tolerance,
                                     double step) {
  if (seeds == 0) throw ConfigError("grad-check: seeds must be positive");
  std::vector<GradCase> out;
  for (std::size_t s = 0; s < seeds; ++s) {
    const std::uint64_t seed = root_seed + s;
    for (const auto& name : grad_case_names()) {
      GradCase c{name, seed, {}};
      if (name == "dense-identity") c.report = dense_case(num::Activation::identity, seed, tolerance, step);
      else if (name == "dense-relu") c.report = dense_case(num::Activation::relu, seed, tolerance, step);
      else if (name == "dense-sigmoid") c.report = dense_case(num::Activation::sigmoid, seed, tolerance, step);
      else if (name == "dense-tanh") c.report = dense_case(num::Activation::tanh, seed, tolerance, step);
      else if (name == "dense-softmax") c.report = dense_case(num::Activation::softmax, seed, tolerance, step);
      else if (name == "cross-entropy") c.report = cross_entropy_case(seed, tolerance, step);
      else if (name == "elementwise") c.report = elementwise_case(seed, tolerance, step);
      else if (name == "distillation") c.report = distill_case(seed, tolerance, step);
      else if (name == "generator-targeted") c.report = generator_case(true, seed, tolerance, step);
      else c.report = generator_case(false, seed, tolerance, step);
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace ffa::cli

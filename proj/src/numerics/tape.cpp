#include "ffa/numerics/tape.hpp"

#include <cmath>
#include <iostream>

#include "ffa/error.hpp"
#include "ffa/numerics/kernels.hpp"

namespace ffa::num {

const Tensor& Var::value() const {
  if (!tape_) throw ContractError("use of an unbound Var");
  return tape_->value(id_);
}

Var Tape::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Parameter& p) {
  Node n;
  n.value = p.value;
  n.param = &p;
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<std::size_t> parents, BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  for (auto p : parents) n.requires_grad = n.requires_grad || nodes_.at(p).requires_grad;
  n.parents = std::move(parents);
  if (n.requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Tensor& Tape::grad(std::size_t id) {
  auto& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor(n.value.shape(), 0.0);
  return n.grad;
}

std::size_t Tape::backward(Var loss) {
  if (&loss.tape() != this) throw ContractError("backward: loss belongs to another tape");
  const auto root = loss.id();
  if (!nodes_[root].value.is_scalar()) {
    throw ContractError("backward: loss must be a scalar, got shape " +
                        to_string(nodes_[root].value.shape()));
  }
  std::size_t reached = 0;
  if (nodes_[root].requires_grad) {
    grad(root).fill(1.0);
    for (std::size_t i = root + 1; i-- > 0;) {
      auto& n = nodes_[i];
      if (n.grad.empty() || !n.requires_grad) continue;
      if (n.param) {
        auto& pg = n.param->grad;
        if (!pg.same_shape(n.grad)) pg = Tensor(n.grad.shape(), 0.0);
        for (std::size_t k = 0; k < pg.size(); ++k) pg[k] += n.grad[k];
        ++reached;
      } else if (n.backward) {
        n.backward(*this, n.grad, n.value);
      }
    }
  }
  if (reached == 0) {
    std::clog << "warning: backward() reached no parameters (detached graph)\n";
  }
  nodes_.clear();
  return reached;
}

namespace ops {

namespace {

Tape& same_tape(Var a, Var b, const char* op) {
  if (&a.tape() != &b.tape()) throw ContractError(std::string(op) + ": operands on different tapes");
  return a.tape();
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                         to_string(b.shape()));
  }
}

template <class F>
Tensor map(const Tensor& x, F f) {
  Tensor out = x;
  for (auto& v : out.values()) v = f(v);
  return out;
}

// Unary elementwise op whose derivative depends on (input, output).
template <class Fwd, class Deriv>
Var unary(Var x, Fwd fwd, Deriv deriv) {
  auto& t = x.tape();
  const auto xi = x.id();
  return t.record(map(x.value(), fwd), {xi},
                  [xi, deriv](Tape& tp, const Tensor& g, const Tensor& y) {
                    if (!tp.requires_grad(xi)) return;
                    const Tensor& xv = tp.value(xi);
                    Tensor& gx = tp.grad(xi);
                    for (std::size_t k = 0; k < g.size(); ++k) gx[k] += g[k] * deriv(xv[k], y[k]);
                  });
}

}  // namespace

Var matmul(Var a, Var b) {
  auto& t = same_tape(a, b, "matmul");
  const auto ai = a.id(), bi = b.id();
  return t.record(kernels::matmul(a.value(), b.value()), {ai, bi},
                  [ai, bi](Tape& tp, const Tensor& g, const Tensor&) {
                    if (tp.requires_grad(ai)) {
                      Tensor ga = kernels::matmul_a_bt(g, tp.value(bi));
                      Tensor& acc = tp.grad(ai);
                      for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += ga[k];
                    }
                    if (tp.requires_grad(bi)) {
                      Tensor gb = kernels::matmul_at_b(tp.value(ai), g);
                      Tensor& acc = tp.grad(bi);
                      for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += gb[k];
                    }
                  });
}

Var add_bias(Var x, Var bias) {
  auto& t = same_tape(x, bias, "add_bias");
  const auto xi = x.id(), bi = bias.id();
  Tensor out = x.value();
  kernels::add_bias_rows(out, bias.value());
  return t.record(std::move(out), {xi, bi}, [xi, bi](Tape& tp, const Tensor& g, const Tensor&) {
    if (tp.requires_grad(xi)) {
      Tensor& gx = tp.grad(xi);
      for (std::size_t k = 0; k < gx.size(); ++k) gx[k] += g[k];
    }
    if (tp.requires_grad(bi)) {
      Tensor cs = kernels::column_sums(g);
      Tensor& gb = tp.grad(bi);
      for (std::size_t k = 0; k < gb.size(); ++k) gb[k] += cs[k];
    }
  });
}

Var relu(Var x) {
  auto& t = x.tape();
  const auto xi = x.id();
  Tensor out = x.value();
  kernels::relu_inplace(out);
  return t.record(std::move(out), {xi}, [xi](Tape& tp, const Tensor& g, const Tensor&) {
    const Tensor& xv = tp.value(xi);
    Tensor& gx = tp.grad(xi);
    for (std::size_t k = 0; k < g.size(); ++k) gx[k] += xv[k] > 0.0 ? g[k] : 0.0;
  });
}

Var sigmoid(Var x) {
  auto& t = x.tape();
  const auto xi = x.id();
  Tensor out = x.value();
  kernels::sigmoid_inplace(out);
  return t.record(std::move(out), {xi}, [xi](Tape& tp, const Tensor& g, const Tensor& y) {
    Tensor& gx = tp.grad(xi);
    for (std::size_t k = 0; k < g.size(); ++k) gx[k] += g[k] * y[k] * (1.0 - y[k]);
  });
}

Var tanh(Var x) {
  auto& t = x.tape();
  const auto xi = x.id();
  Tensor out = x.value();
  kernels::tanh_inplace(out);
  return t.record(std::move(out), {xi}, [xi](Tape& tp, const Tensor& g, const Tensor& y) {
    Tensor& gx = tp.grad(xi);
    for (std::size_t k = 0; k < g.size(); ++k) gx[k] += g[k] * (1.0 - y[k] * y[k]);
  });
}

Var softmax(Var x) {
  auto& t = x.tape();
  const auto xi = x.id();
  Tensor out = x.value();
  kernels::softmax_rows_inplace(out);
  return t.record(std::move(out), {xi}, [xi](Tape& tp, const Tensor& g, const Tensor& y) {
    Tensor& gx = tp.grad(xi);
    const std::size_t n = y.rows(), m = y.cols();
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < m; ++j) dot += g[i * m + j] * y[i * m + j];
      for (std::size_t j = 0; j < m; ++j) gx[i * m + j] += y[i * m + j] * (g[i * m + j] - dot);
    }
  });
}

Var add(Var a, Var b) {
  auto& t = same_tape(a, b, "add");
  require_same_shape(a.value(), b.value(), "add");
  const auto ai = a.id(), bi = b.id();
  Tensor out = a.value();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += b.value()[k];
  return t.record(std::move(out), {ai, bi}, [ai, bi](Tape& tp, const Tensor& g, const Tensor&) {
    for (auto id : {ai, bi}) {
      if (!tp.requires_grad(id)) continue;
      Tensor& gx = tp.grad(id);
      for (std::size_t k = 0; k < g.size(); ++k) gx[k] += g[k];
    }
  });
}

Var sub(Var a, Var b) {
  auto& t = same_tape(a, b, "sub");
  require_same_shape(a.value(), b.value(), "sub");
  const auto ai = a.id(), bi = b.id();
  Tensor out = a.value();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] -= b.value()[k];
  return t.record(std::move(out), {ai, bi}, [ai, bi](Tape& tp, const Tensor& g, const Tensor&) {
    if (tp.requires_grad(ai)) {
      Tensor& ga = tp.grad(ai);
      for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k];
    }
    if (tp.requires_grad(bi)) {
      Tensor& gb = tp.grad(bi);
      for (std::size_t k = 0; k < g.size(); ++k) gb[k] -= g[k];
    }
  });
}

Var mul(Var a, Var b) {
  auto& t = same_tape(a, b, "mul");
  require_same_shape(a.value(), b.value(), "mul");
  const auto ai = a.id(), bi = b.id();
  Tensor out = a.value();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] *= b.value()[k];
  return t.record(std::move(out), {ai, bi}, [ai, bi](Tape& tp, const Tensor& g, const Tensor&) {
    const Tensor& av = tp.value(ai);
    const Tensor& bv = tp.value(bi);
    if (tp.requires_grad(ai)) {
      Tensor& ga = tp.grad(ai);
      for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k] * bv[k];
    }
    if (tp.requires_grad(bi)) {
      Tensor& gb = tp.grad(bi);
      for (std::size_t k = 0; k < g.size(); ++k) gb[k] += g[k] * av[k];
    }
  });
}

Var div(Var a, Var b) {
  auto& t = same_tape(a, b, "div");
  require_same_shape(a.value(), b.value(), "div");
  const auto ai = a.id(), bi = b.id();
  Tensor out = a.value();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] /= b.value()[k];
  return t.record(std::move(out), {ai, bi}, [ai, bi](Tape& tp, const Tensor& g, const Tensor& y) {
    const Tensor& bv = tp.value(bi);
    if (tp.requires_grad(ai)) {
      Tensor& ga = tp.grad(ai);
      for (std::size_t k = 0; k < g.size(); ++k) ga[k] += g[k] / bv[k];
    }
    if (tp.requires_grad(bi)) {
      Tensor& gb = tp.grad(bi);
      for (std::size_t k = 0; k < g.size(); ++k) gb[k] -= g[k] * y[k] / bv[k];
    }
  });
}

Var scale(Var x, double factor) {
  return unary(
      x, [factor](double v) { return v * factor; },
      [factor](double, double) { return factor; });
}

Var add_scalar(Var x, double c) {
  return unary(
      x, [c](double v) { return v + c; }, [](double, double) { return 1.0; });
}

Var abs(Var x) {
  return unary(
      x, [](double v) { return std::fabs(v); },
      [](double v, double) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Var clamp(Var x, double lo, double hi) {
  return unary(
      x, [lo, hi](double v) { return v < lo ? lo : (v > hi ? hi : v); },
      [lo, hi](double v, double) { return (v >= lo && v <= hi) ? 1.0 : 0.0; });
}

Var minimum(Var x, double c) {
  return unary(
      x, [c](double v) { return v <= c ? v : c; },
      [c](double v, double) { return v <= c ? 1.0 : 0.0; });
}

Var sum(Var x) {
  auto& t = x.tape();
  const auto xi = x.id();
  double s = 0.0;
  for (double v : x.value().values()) s += v;
  return t.record(Tensor::scalar(s), {xi}, [xi](Tape& tp, const Tensor& g, const Tensor&) {
    Tensor& gx = tp.grad(xi);
    for (auto& v : gx.values()) v += g[0];
  });
}

Var mean(Var x) { return scale(sum(x), 1.0 / static_cast<double>(x.value().size())); }

Var softmax_cross_entropy(Var logits, std::span<const int> labels) {
  auto& t = logits.tape();
  const Tensor& z = logits.value();
  const std::size_t n = z.rows(), m = z.cols();
  if (labels.size() != n) {
    throw DimensionError("softmax_cross_entropy: " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(n) + " rows");
  }
  Tensor probs = z;
  kernels::softmax_rows_inplace(probs);
  Tensor loss = Tensor::matrix(n, 1);
  std::vector<int> lab(labels.begin(), labels.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (lab[i] < 0 || static_cast<std::size_t>(lab[i]) >= m) {
      throw ContractError("softmax_cross_entropy: label out of range");
    }
    // log-sum-exp evaluated stably; avoids log(0) for saturated softmax.
    const auto row = z.row_span(i);
    double mx = row[0];
    for (double v : row) mx = std::max(mx, v);
    double se = 0.0;
    for (double v : row) se += std::exp(v - mx);
    loss[i] = mx + std::log(se) - row[static_cast<std::size_t>(lab[i])];
  }
  const auto zi = logits.id();
  return t.record(std::move(loss), {zi},
                  [zi, probs = std::move(probs), lab = std::move(lab)](Tape& tp, const Tensor& g,
                                                                       const Tensor&) {
                    Tensor& gz = tp.grad(zi);
                    const std::size_t cols = probs.cols();
                    for (std::size_t i = 0; i < probs.rows(); ++i) {
                      for (std::size_t j = 0; j < cols; ++j) {
                        const double onehot = static_cast<int>(j) == lab[i] ? 1.0 : 0.0;
                        gz[i * cols + j] += g[i] * (probs[i * cols + j] - onehot);
                      }
                    }
                  });
}

Var scatter_columns(Var x, std::span<const std::size_t> columns, std::size_t width) {
  auto& t = x.tape();
  const Tensor& xv = x.value();
  if (columns.size() != xv.cols()) {
    throw DimensionError("scatter_columns: " + std::to_string(columns.size()) +
                         " target columns for input " + to_string(xv.shape()));
  }
  for (auto c : columns) {
    if (c >= width) throw DimensionError("scatter_columns: column index out of range");
  }
  Tensor out = Tensor::matrix(xv.rows(), width);
  for (std::size_t i = 0; i < xv.rows(); ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) out.at(i, columns[j]) = xv.at(i, j);
  }
  const auto xi = x.id();
  std::vector<std::size_t> cols(columns.begin(), columns.end());
  return t.record(std::move(out), {xi},
                  [xi, cols = std::move(cols)](Tape& tp, const Tensor& g, const Tensor&) {
                    Tensor& gx = tp.grad(xi);
                    for (std::size_t i = 0; i < gx.rows(); ++i) {
                      for (std::size_t j = 0; j < cols.size(); ++j) gx.at(i, j) += g.at(i, cols[j]);
                    }
                  });
}

Var gather_columns(Var x, std::span<const std::size_t> columns) {
  auto& t = x.tape();
  const Tensor& xv = x.value();
  for (auto c : columns) {
    if (c >= xv.cols()) throw DimensionError("gather_columns: column index out of range");
  }
  Tensor out = Tensor::matrix(xv.rows(), columns.size());
  for (std::size_t i = 0; i < xv.rows(); ++i) {
    for (std::size_t j = 0; j < columns.size(); ++j) out.at(i, j) = xv.at(i, columns[j]);
  }
  const auto xi = x.id();
  std::vector<std::size_t> cols(columns.begin(), columns.end());
  return t.record(std::move(out), {xi},
                  [xi, cols = std::move(cols)](Tape& tp, const Tensor& g, const Tensor&) {
                    Tensor& gx = tp.grad(xi);
                    for (std::size_t i = 0; i < g.rows(); ++i) {
                      for (std::size_t j = 0; j < cols.size(); ++j) gx.at(i, cols[j]) += g.at(i, j);
                    }
                  });
}

}  // namespace ops

}  // namespace ffa::num

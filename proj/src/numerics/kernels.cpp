#include "ffa/numerics/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ffa/error.hpp"

namespace ffa::num::kernels {

namespace {

// Below this many multiply-adds the fork/join cost dominates.
constexpr long kParallelWork = 1L << 15;

void require(bool ok, const char* op, const Tensor& a, const Tensor& b) {
  if (!ok) {
    throw DimensionError(std::string(op) + ": incompatible shapes " + to_string(a.shape()) +
                         " and " + to_string(b.shape()));
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.cols() == b.rows(), "matmul", a, b);
  const long n = static_cast<long>(a.rows());
  const std::size_t k = a.cols(), m = b.cols();
  Tensor c = Tensor::matrix(a.rows(), m);
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
#pragma omp parallel for schedule(static) if (n * static_cast<long>(k * m) > kParallelWork)
  for (long i = 0; i < n; ++i) {
    double* crow = pc + i * m;
    const double* arow = pa + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      const double* brow = pb + p * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

Tensor matmul_at_b(const Tensor& a, const Tensor& b) {
  require(a.rows() == b.rows(), "matmul_at_b", a, b);
  const std::size_t n = a.rows(), m = b.cols();
  const long k = static_cast<long>(a.cols());
  Tensor c = Tensor::matrix(a.cols(), m);
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
#pragma omp parallel for schedule(static) if (k * static_cast<long>(n * m) > kParallelWork)
  for (long i = 0; i < k; ++i) {
    double* crow = pc + i * m;
    for (std::size_t r = 0; r < n; ++r) {
      const double av = pa[r * k + i];
      if (av == 0.0) continue;
      const double* brow = pb + r * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

Tensor matmul_a_bt(const Tensor& a, const Tensor& b) {
  require(a.cols() == b.cols(), "matmul_a_bt", a, b);
  const long n = static_cast<long>(a.rows());
  const std::size_t m = a.cols(), k = b.rows();
  Tensor c = Tensor::matrix(a.rows(), k);
  const double* pa = a.data();
  const double* pb = b.data();
  double* pc = c.data();
#pragma omp parallel for schedule(static) if (n * static_cast<long>(k * m) > kParallelWork)
  for (long i = 0; i < n; ++i) {
    const double* arow = pa + i * m;
    for (std::size_t j = 0; j < k; ++j) {
      const double* brow = pb + j * m;
      double acc = 0.0;
      for (std::size_t p = 0; p < m; ++p) acc += arow[p] * brow[p];
      pc[i * k + j] = acc;
    }
  }
  return c;
}

void add_bias_rows(Tensor& x, const Tensor& bias) {
  require(bias.size() == x.cols(), "add_bias_rows", x, bias);
  const std::size_t n = x.rows(), m = x.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double* row = x.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) row[j] += bias[j];
  }
}

Tensor column_sums(const Tensor& x) {
  Tensor out = Tensor::matrix(1, x.cols());
  const std::size_t n = x.rows(), m = x.cols();
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = x.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) out[j] += row[j];
  }
  return out;
}

void relu_inplace(Tensor& x) {
  for (auto& v : x.values()) v = v > 0.0 ? v : 0.0;
}

void sigmoid_inplace(Tensor& x) {
  for (auto& v : x.values()) {
    // Split by sign so exp() never overflows.
    if (v >= 0.0) {
      v = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      v = e / (1.0 + e);
    }
  }
}

void tanh_inplace(Tensor& x) {
  for (auto& v : x.values()) v = std::tanh(v);
}

void softmax_rows_inplace(Tensor& x) {
  const long n = static_cast<long>(x.rows());
  const std::size_t m = x.cols();
  double* px = x.data();
#pragma omp parallel for schedule(static) if (n * static_cast<long>(m) > kParallelWork)
  for (long i = 0; i < n; ++i) {
    double* row = px + i * m;
    const double mx = *std::max_element(row, row + m);
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    for (std::size_t j = 0; j < m; ++j) row[j] /= sum;
  }
}

namespace serial {

Tensor matmul(const Tensor& a, const Tensor& b) {
  require(a.cols() == b.rows(), "matmul", a, b);
  Tensor c = Tensor::matrix(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < a.cols(); ++p) acc += a.at(i, p) * b.at(p, j);
      c.at(i, j) = acc;
    }
  }
  return c;
}

Tensor matmul_at_b(const Tensor& a, const Tensor& b) {
  require(a.rows() == b.rows(), "matmul_at_b", a, b);
  Tensor c = Tensor::matrix(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t r = 0; r < a.rows(); ++r) acc += a.at(r, i) * b.at(r, j);
      c.at(i, j) = acc;
    }
  }
  return c;
}

Tensor matmul_a_bt(const Tensor& a, const Tensor& b) {
  require(a.cols() == b.cols(), "matmul_a_bt", a, b);
  Tensor c = Tensor::matrix(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < a.cols(); ++p) acc += a.at(i, p) * b.at(j, p);
      c.at(i, j) = acc;
    }
  }
  return c;
}

void softmax_rows_inplace(Tensor& x) {
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto row = x.row_span(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (auto& v : row) {
      v = std::exp(v - mx);
      sum += v;
    }
    for (auto& v : row) v /= sum;
  }
}

}  // namespace serial

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
  omp_set_num_threads(std::max(1, n));
#else
  (void)n;
#endif
}

}  // namespace ffa::num::kernels

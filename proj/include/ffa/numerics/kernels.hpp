#pragma once

// Dense kernels used by both the autodiff tape and the inference paths.
//
// Every kernel in ffa::num::kernels is OpenMP-parallel over output rows (or
// output columns for the transposed product). Each output element is produced
// by exactly one thread with a fixed accumulation order, so results are
// bit-identical for any thread count. ffa::num::kernels::serial holds the
// straightforward single-threaded reference versions used by the tests and
// the benchmark.

#include "ffa/numerics/tensor.hpp"

namespace ffa::num::kernels {

// C = A * B with A (n x k), B (k x m).
Tensor matmul(const Tensor& a, const Tensor& b);
// C = A^T * B with A (n x k), B (n x m); result (k x m).
Tensor matmul_at_b(const Tensor& a, const Tensor& b);
// C = A * B^T with A (n x m), B (k x m); result (n x k).
Tensor matmul_a_bt(const Tensor& a, const Tensor& b);

// Adds a (1 x m) bias row to every row of x in place.
void add_bias_rows(Tensor& x, const Tensor& bias);
// Column sums of x as a (1 x m) tensor.
Tensor column_sums(const Tensor& x);

void relu_inplace(Tensor& x);
void sigmoid_inplace(Tensor& x);
void tanh_inplace(Tensor& x);
// Row-wise softmax with max subtraction.
void softmax_rows_inplace(Tensor& x);

namespace serial {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor matmul_at_b(const Tensor& a, const Tensor& b);
Tensor matmul_a_bt(const Tensor& a, const Tensor& b);
void softmax_rows_inplace(Tensor& x);

}  // namespace serial

// Threads the OpenMP kernels will use (1 when built without OpenMP).
int max_threads();
void set_threads(int n);

}  // namespace ffa::num::kernels

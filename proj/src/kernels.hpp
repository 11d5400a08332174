#pragma once

// Inner loops of the network. Every routine walks its reduction index in a
// fixed sequential order, so an output element gets the same bits no matter
// how many rows are processed together.

#include <cstddef>

namespace dcload::detail {

// out[b, :] += sum_i a[b, i] * m[i, :]
//   out: rows x n (row stride ldo), a: rows x inner (row stride lda),
//   m: inner x n, contiguous. Output rows may overlap (ldo < n); they are
//   then finished in order b = 0, 1, ...
void accumulate_product(double* out, std::size_t ldo, const double* a, std::size_t lda,
                        const double* m, std::size_t rows, std::size_t inner, std::size_t n);

inline void accumulate_product(double* out, const double* a, const double* m, std::size_t rows,
                               std::size_t inner, std::size_t n) {
    accumulate_product(out, n, a, inner, m, rows, inner, n);
}

// grad[j, :] += sum_b dy[b, j] * x[b, :]
//   grad: n x k contiguous, dy: rows x n (stride lddy), x: rows x k (stride ldx)
void accumulate_outer(double* grad, const double* dy, std::size_t lddy, const double* x,
                      std::size_t ldx, std::size_t rows, std::size_t n, std::size_t k);

inline void accumulate_outer(double* grad, const double* dy, const double* x, std::size_t rows,
                             std::size_t n, std::size_t k) {
    accumulate_outer(grad, dy, n, x, k, rows, n, k);
}

// bias[j] += sum_b dy[b, j]
void accumulate_column_sums(double* bias, const double* dy, std::size_t rows, std::size_t n);

// Each of `rows` rows of out (width n) set to bias.
void broadcast_rows(double* out, const double* bias, std::size_t rows, std::size_t n);

// m is rows x cols; t becomes cols x rows.
void transpose(double* t, const double* m, std::size_t rows, std::size_t cols);

// Activations shared by every code path. exp_approx and tanh_approx stay
// within a few ulp of std::exp / std::tanh (input to exp clamped to +-708)
// and vectorize, unlike the libm calls.
double exp_approx(double x) noexcept;
double sigmoid(double x) noexcept;
double tanh_approx(double x) noexcept;
void sigmoid_inplace(double* v, std::size_t n) noexcept;
void tanh_inplace(double* v, std::size_t n) noexcept;
void tanh_into(double* out, const double* v, std::size_t n) noexcept;

} // namespace dcload::detail

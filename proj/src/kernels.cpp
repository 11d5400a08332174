#include "kernels.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>

namespace dcload::detail {

namespace {

// Four doubles in one register (GCC/Clang vector extension). Arithmetic on
// it rounds exactly like the scalar code, lane by lane, so tile shape never
// changes the result.
typedef double vec4 __attribute__((vector_size(32)));

inline vec4 load4(const double* p) {
    vec4 v;
    std::memcpy(&v, p, sizeof v);
    return v;
}

inline void store4(double* p, vec4 v) {
    std::memcpy(p, &v, sizeof v);
}

inline vec4 splat4(double s) {
    return vec4{s, s, s, s};
}

// R rows of out, columns [j, j + 4*V), full reduction over i.
template <std::size_t R, std::size_t V>
inline void product_tile(double* out, std::size_t ldo, const double* a, std::size_t lda,
                         const double* __restrict m, std::size_t inner, std::size_t n, std::size_t j) {
    vec4 acc[R][V];
    for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t v = 0; v < V; ++v) acc[r][v] = load4(out + r * ldo + j + 4 * v);
    }
    for (std::size_t i = 0; i < inner; ++i) {
        vec4 mv[V];
        for (std::size_t v = 0; v < V; ++v) mv[v] = load4(m + i * n + j + 4 * v);
        for (std::size_t r = 0; r < R; ++r) {
            const vec4 av = splat4(a[r * lda + i]);
            for (std::size_t v = 0; v < V; ++v) acc[r][v] = acc[r][v] + av * mv[v];
        }
    }
    for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t v = 0; v < V; ++v) store4(out + r * ldo + j + 4 * v, acc[r][v]);
    }
}

template <std::size_t R>
inline void product_rows(double* out, std::size_t ldo, const double* a, std::size_t lda,
                         const double* __restrict m, std::size_t inner, std::size_t n) {
    std::size_t j = 0;
    for (; j + 8 <= n; j += 8) product_tile<R, 2>(out, ldo, a, lda, m, inner, n, j);
    for (; j + 4 <= n; j += 4) product_tile<R, 1>(out, ldo, a, lda, m, inner, n, j);
    for (; j < n; ++j) {
        for (std::size_t r = 0; r < R; ++r) {
            double acc = out[r * ldo + j];
            for (std::size_t i = 0; i < inner; ++i) acc = acc + a[r * lda + i] * m[i * n + j];
            out[r * ldo + j] = acc;
        }
    }
}

// R rows of grad starting at j, columns [c, c + 4*V), full reduction over b.
template <std::size_t R, std::size_t V>
inline void outer_tile(double* __restrict grad, const double* dy, std::size_t lddy, const double* x,
                       std::size_t ldx, std::size_t rows, std::size_t k, std::size_t j, std::size_t c) {
    vec4 acc[R][V];
    for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t v = 0; v < V; ++v) acc[r][v] = load4(grad + (j + r) * k + c + 4 * v);
    }
    for (std::size_t b = 0; b < rows; ++b) {
        vec4 xv[V];
        for (std::size_t v = 0; v < V; ++v) xv[v] = load4(x + b * ldx + c + 4 * v);
        for (std::size_t r = 0; r < R; ++r) {
            const vec4 d = splat4(dy[b * lddy + j + r]);
            for (std::size_t v = 0; v < V; ++v) acc[r][v] = acc[r][v] + d * xv[v];
        }
    }
    for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t v = 0; v < V; ++v) store4(grad + (j + r) * k + c + 4 * v, acc[r][v]);
    }
}

template <std::size_t R>
inline void outer_rows(double* __restrict grad, const double* dy, std::size_t lddy, const double* x,
                       std::size_t ldx, std::size_t rows, std::size_t k, std::size_t j) {
    std::size_t c = 0;
    for (; c + 8 <= k; c += 8) outer_tile<R, 2>(grad, dy, lddy, x, ldx, rows, k, j, c);
    for (; c + 4 <= k; c += 4) outer_tile<R, 1>(grad, dy, lddy, x, ldx, rows, k, j, c);
    for (; c < k; ++c) {
        for (std::size_t r = 0; r < R; ++r) {
            double acc = grad[(j + r) * k + c];
            for (std::size_t b = 0; b < rows; ++b) acc = acc + dy[b * lddy + j + r] * x[b * ldx + c];
            grad[(j + r) * k + c] = acc;
        }
    }
}

// exp(x) = 2^k * (1 + e), x = k ln2 + r, |r| <= ln2/2, e = expm1(r) from its
// Taylor series to r^13 (truncation below 1e-17). Input clamped to +-708.
struct ExpParts {
    double scale;  // 2^k
    double em1;    // expm1(r)
};

inline ExpParts exp_parts(double x) {
    constexpr double kLog2e = 1.4426950408889634;
    constexpr double kLn2Hi = 6.93147180369123816490e-01;
    constexpr double kLn2Lo = 1.90821492927058770002e-10;
    constexpr double kShift = 0x1.8p52;
    x = x < -708.0 ? -708.0 : x;
    x = x > 708.0 ? 708.0 : x;
    const double shifted = x * kLog2e + kShift;
    const double k = shifted - kShift;
    const double r = (x - k * kLn2Hi) - k * kLn2Lo;
    double p = 1.0 / 6227020800.0;  // 1/13!
    p = p * r + 1.0 / 479001600.0;
    p = p * r + 1.0 / 39916800.0;
    p = p * r + 1.0 / 3628800.0;
    p = p * r + 1.0 / 362880.0;
    p = p * r + 1.0 / 40320.0;
    p = p * r + 1.0 / 5040.0;
    p = p * r + 1.0 / 720.0;
    p = p * r + 1.0 / 120.0;
    p = p * r + 1.0 / 24.0;
    p = p * r + 1.0 / 6.0;
    p = p * r + 0.5;
    p = p * r + 1.0;
    // Low bits of `shifted` hold k; moving k + 1023 into the exponent field
    // builds 2^k without an int conversion.
    const std::uint64_t bits = (std::bit_cast<std::uint64_t>(shifted) + 1023u) << 52;
    return {std::bit_cast<double>(bits), p * r};
}

inline double exp_value(double x) {
    const ExpParts e = exp_parts(x);
    return e.scale + e.scale * e.em1;
}

inline double sigmoid_value(double x) {
    return 1.0 / (1.0 + exp_value(-x));
}

inline double tanh_value(double x) {
    // tanh x = expm1(2x) / (expm1(2x) + 2); keeps full relative accuracy near 0.
    const ExpParts e = exp_parts(2.0 * x);
    const double em1 = e.scale * e.em1 + (e.scale - 1.0);
    return em1 / (em1 + 2.0);
}

} // namespace

void accumulate_product(double* out, std::size_t ldo, const double* a, std::size_t lda,
                        const double* __restrict m, std::size_t rows, std::size_t inner,
                        std::size_t n) {
    std::size_t b = 0;
    // Overlapping output rows must be completed one at a time.
    if (ldo >= n) {
        for (; b + 4 <= rows; b += 4) product_rows<4>(out + b * ldo, ldo, a + b * lda, lda, m, inner, n);
    }
    for (; b < rows; ++b) product_rows<1>(out + b * ldo, ldo, a + b * lda, lda, m, inner, n);
}

void accumulate_outer(double* __restrict grad, const double* dy, std::size_t lddy,
                      const double* x, std::size_t ldx, std::size_t rows, std::size_t n,
                      std::size_t k) {
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) outer_rows<4>(grad, dy, lddy, x, ldx, rows, k, j);
    for (; j < n; ++j) outer_rows<1>(grad, dy, lddy, x, ldx, rows, k, j);
}

void accumulate_column_sums(double* __restrict bias, const double* __restrict dy,
                            std::size_t rows, std::size_t n) {
    for (std::size_t b = 0; b < rows; ++b) {
        const double* __restrict r = dy + b * n;
        for (std::size_t j = 0; j < n; ++j) {
            bias[j] += r[j];
        }
    }
}

void broadcast_rows(double* __restrict out, const double* __restrict bias, std::size_t rows,
                    std::size_t n) {
    for (std::size_t b = 0; b < rows; ++b) {
        std::memcpy(out + b * n, bias, n * sizeof(double));
    }
}

void transpose(double* __restrict t, const double* __restrict m, std::size_t rows,
               std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            t[c * rows + r] = m[r * cols + c];
        }
    }
}

double exp_approx(double x) noexcept {
    return exp_value(x);
}

double sigmoid(double x) noexcept {
    return sigmoid_value(x);
}

double tanh_approx(double x) noexcept {
    return tanh_value(x);
}

void sigmoid_inplace(double* __restrict v, std::size_t n) noexcept {
    for (std::size_t i = 0; i < n; ++i) v[i] = sigmoid_value(v[i]);
}

void tanh_inplace(double* __restrict v, std::size_t n) noexcept {
    for (std::size_t i = 0; i < n; ++i) v[i] = tanh_value(v[i]);
}

void tanh_into(double* __restrict out, const double* __restrict v, std::size_t n) noexcept {
    for (std::size_t i = 0; i < n; ++i) out[i] = tanh_value(v[i]);
}

} // namespace dcload::detail

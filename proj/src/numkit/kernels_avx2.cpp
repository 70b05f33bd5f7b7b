#include "bbarena/numkit/kernels.hpp"

#include <algorithm>
#include <cmath>

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#define BBARENA_HAVE_AVX2 1
#else
#define BBARENA_HAVE_AVX2 0
#endif

namespace bbarena::kernels {

#if BBARENA_HAVE_AVX2
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    __m256d acc2 = _mm256_setzero_pd();
    __m256d acc3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
        acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), acc2);
        acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), acc3);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double acc = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_squares_avx2(const double* a, std::size_t n) { return dot_avx2(a, a, n); }

double max_abs_avx2(const double* a, std::size_t n) {
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    __m256d m = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) m = _mm256_max_pd(m, _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(a + i)));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, m);
    double result = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
    for (; i < n; ++i) result = std::max(result, std::fabs(a[i]));
    return result;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void add_scaled_avx2(const double* x, double alpha, const double* y, double* out, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) out[i] = x[i] + alpha * y[i];
}

void matvec_bias_avx2(const double* w, const double* x, const double* bias, double* out,
                      std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) out[r] = bias[r] + dot_avx2(w + r * cols, x, cols);
}

void matvec_transposed_avx2(const double* w, const double* g, double* out, std::size_t rows,
                            std::size_t cols) {
    std::fill(out, out + cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r) axpy_avx2(g[r], w + r * cols, out, cols);
}

void relu_avx2(double* a, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    // max_pd returns its second operand on NaN, same as the scalar form.
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(a + i, _mm256_max_pd(_mm256_loadu_pd(a + i), zero));
    for (; i < n; ++i) a[i] = a[i] > 0.0 ? a[i] : 0.0;
}

void clamp_between_avx2(double* a, const double* lo, const double* hi, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_max_pd(_mm256_loadu_pd(lo + i), _mm256_loadu_pd(a + i));
        _mm256_storeu_pd(a + i, _mm256_min_pd(_mm256_loadu_pd(hi + i), v));
    }
    for (; i < n; ++i) a[i] = std::min(hi[i], std::max(lo[i], a[i]));
}

}  // namespace

const KernelTable* avx2_table() {
    static const KernelTable table{
        "avx2",           dot_avx2,
        sum_squares_avx2, max_abs_avx2,
        axpy_avx2,        add_scaled_avx2,
        matvec_bias_avx2, matvec_transposed_avx2,
        relu_avx2,        clamp_between_avx2,
    };
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return supported ? &table : nullptr;
}

#else

const KernelTable* avx2_table() { return nullptr; }

#endif

}  // namespace bbarena::kernels

#pragma once

// Dense double-precision inner loops. Every kernel has a portable scalar
// reference and, where the CPU supports it, an AVX2+FMA variant; the active
// table is chosen once at startup. Variants agree up to reassociation of
// floating-point sums.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace bbarena::kernels {

struct KernelTable {
    std::string_view name;

    // sum_i a[i] * b[i]
    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum_i a[i]^2
    double (*sum_squares)(const double* a, std::size_t n);
    // max_i |a[i]|
    double (*max_abs)(const double* a, std::size_t n);
    // y[i] += alpha * x[i]
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // out[i] = x[i] + alpha * y[i]  (out may alias x)
    void (*add_scaled)(const double* x, double alpha, const double* y, double* out, std::size_t n);
    // out = W x + bias, W is rows x cols row-major
    void (*matvec_bias)(const double* w, const double* x, const double* bias, double* out,
                        std::size_t rows, std::size_t cols);
    // out = W^T g, W is rows x cols row-major, out has cols entries
    void (*matvec_transposed)(const double* w, const double* g, double* out, std::size_t rows,
                              std::size_t cols);
    // a[i] = max(a[i], 0)
    void (*relu)(double* a, std::size_t n);
    // a[i] = min(hi[i], max(lo[i], a[i]))
    void (*clamp_between)(double* a, const double* lo, const double* hi, std::size_t n);
};

const KernelTable& scalar_table();
/// nullptr when the binary or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();

/// The table used by the rest of the library. Set BBARENA_SIMD=scalar in the
/// environment to force the reference kernels.
const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active().dot(a.data(), b.data(), a.size());
}
inline double sum_squares(std::span<const double> a) {
    return active().sum_squares(a.data(), a.size());
}
inline double max_abs(std::span<const double> a) { return active().max_abs(a.data(), a.size()); }
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace bbarena::kernels

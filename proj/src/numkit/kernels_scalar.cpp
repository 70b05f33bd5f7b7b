#include "bbarena/numkit/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace bbarena::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum_squares_scalar(const double* a, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i];
    return acc;
}

double max_abs_scalar(const double* a, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(a[i]));
    return m;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void add_scaled_scalar(const double* x, double alpha, const double* y, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + alpha * y[i];
}

void matvec_bias_scalar(const double* w, const double* x, const double* bias, double* out,
                        std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) out[r] = bias[r] + dot_scalar(w + r * cols, x, cols);
}

void matvec_transposed_scalar(const double* w, const double* g, double* out, std::size_t rows,
                              std::size_t cols) {
    std::fill(out, out + cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r) axpy_scalar(g[r], w + r * cols, out, cols);
}

void relu_scalar(double* a, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) a[i] = a[i] > 0.0 ? a[i] : 0.0;
}

void clamp_between_scalar(double* a, const double* lo, const double* hi, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) a[i] = std::min(hi[i], std::max(lo[i], a[i]));
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{
        "scalar",          dot_scalar,
        sum_squares_scalar, max_abs_scalar,
        axpy_scalar,        add_scaled_scalar,
        matvec_bias_scalar, matvec_transposed_scalar,
        relu_scalar,        clamp_between_scalar,
    };
    return table;
}

}  // namespace bbarena::kernels

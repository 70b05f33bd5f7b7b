#include <algorithm>
#include <cmath>
#include <limits>

#include "bbarena/numkit/error.hpp"
#include "bbarena/numkit/kernels.hpp"
#include "bbarena/theorylab/theorylab.hpp"

namespace bbarena::theorylab {

namespace {

double l2(std::span<const double> v) { return std::sqrt(kernels::sum_squares(v)); }

// ||A||_2 of a symmetric matrix by power iteration on A^2.
double spectral_norm(const std::vector<double>& a, std::size_t d) {
    std::vector<double> v(d), w(d), z(d);
    for (std::size_t i = 0; i < d; ++i) v[i] = 1.0 + 0.1 * static_cast<double>(i);
    double estimate = 0.0;
    for (int iter = 0; iter < 2000; ++iter) {
        const double n = l2(v);
        if (n == 0.0) return 0.0;
        for (double& x : v) x /= n;
        for (std::size_t i = 0; i < d; ++i) w[i] = kernels::dot({a.data() + i * d, d}, v);
        for (std::size_t i = 0; i < d; ++i) z[i] = kernels::dot({a.data() + i * d, d}, w);
        const double next = std::sqrt(std::max(0.0, kernels::dot(z, v)));
        v.swap(z);
        if (iter > 10 && std::fabs(next - estimate) <= 1e-14 * std::max(1.0, next)) {
            estimate = next;
            break;
        }
        estimate = next;
    }
    return estimate;
}

}  // namespace

AnalyticOracle AnalyticOracle::affine(std::vector<double> c, double b) {
    require(!c.empty(), "AnalyticOracle::affine: slope must be nonempty");
    AnalyticOracle f(Kind::Affine, c.size());
    f.linear_ = std::move(c);
    f.offset_ = b;
    return f;
}

AnalyticOracle AnalyticOracle::quadratic(std::vector<double> a, std::vector<double> b) {
    const std::size_t d = b.size();
    require(d >= 1, "AnalyticOracle::quadratic: dimension must be positive");
    require(a.size() == d * d, "AnalyticOracle::quadratic: A must be d x d");
    AnalyticOracle f(Kind::Quadratic, d);
    f.matrix_.assign(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) f.matrix_[i * d + j] = 0.5 * (a[i * d + j] + a[j * d + i]);
    f.linear_ = std::move(b);
    f.spectral_norm_ = spectral_norm(f.matrix_, d);
    return f;
}

AnalyticOracle AnalyticOracle::bowl(const Vector& minimizer, double curvature) {
    require(curvature > 0.0, "AnalyticOracle::bowl: curvature must be positive");
    const std::size_t d = minimizer.size();
    std::vector<double> a(d * d, 0.0), b(d);
    for (std::size_t i = 0; i < d; ++i) {
        a[i * d + i] = curvature;
        b[i] = -2.0 * curvature * minimizer[i];
    }
    AnalyticOracle f = quadratic(std::move(a), std::move(b));
    f.spectral_norm_ = curvature;
    return f;
}

AnalyticOracle AnalyticOracle::piecewise_max(std::vector<std::vector<double>> slopes) {
    require(!slopes.empty() && !slopes.front().empty(),
            "AnalyticOracle::piecewise_max: at least one nonempty slope required");
    const std::size_t d = slopes.front().size();
    for (const auto& c : slopes)
        require(c.size() == d, "AnalyticOracle::piecewise_max: slopes differ in dimension");
    AnalyticOracle f(Kind::PiecewiseMax, d);
    f.slopes_ = std::move(slopes);
    return f;
}

double AnalyticOracle::value(std::span<const double> x) const {
    require(x.size() == dim_, "AnalyticOracle: dimension mismatch");
    switch (kind_) {
        case Kind::Affine:
            return kernels::dot(linear_, x) + offset_;
        case Kind::Quadratic: {
            double s = 0.0;
            for (std::size_t i = 0; i < dim_; ++i)
                s += x[i] * (kernels::dot({matrix_.data() + i * dim_, dim_}, x) + linear_[i]);
            return s;
        }
        case Kind::PiecewiseMax: {
            double best = -std::numeric_limits<double>::infinity();
            for (const auto& c : slopes_) best = std::max(best, kernels::dot(c, x));
            return best;
        }
    }
    return 0.0;
}

std::vector<double> AnalyticOracle::gradient(std::span<const double> x) const {
    require(x.size() == dim_, "AnalyticOracle: dimension mismatch");
    switch (kind_) {
        case Kind::Affine:
            return linear_;
        case Kind::Quadratic: {
            std::vector<double> g(dim_);
            for (std::size_t i = 0; i < dim_; ++i)
                g[i] = 2.0 * kernels::dot({matrix_.data() + i * dim_, dim_}, x) + linear_[i];
            return g;
        }
        case Kind::PiecewiseMax: {
            std::size_t arg = 0;
            double best = kernels::dot(slopes_[0], x);
            for (std::size_t k = 1; k < slopes_.size(); ++k) {
                const double v = kernels::dot(slopes_[k], x);
                if (v > best) best = v, arg = k;
            }
            return slopes_[arg];
        }
    }
    return {};
}

double AnalyticOracle::lipschitz0() const {
    switch (kind_) {
        case Kind::Affine:
            return l2(linear_);
        case Kind::PiecewiseMax: {
            double best = 0.0;
            for (const auto& c : slopes_) best = std::max(best, l2(c));
            return best;
        }
        case Kind::Quadratic:
            break;
    }
    throw ContractViolation("AnalyticOracle: a quadratic has no global L0; pass a region");
}

double AnalyticOracle::lipschitz0(const NormBall& region) const {
    require(region.center().size() == dim_, "AnalyticOracle: region dimension mismatch");
    if (kind_ != Kind::Quadratic) return lipschitz0();
    const double r2 = region.kind() == NormKind::L2
                          ? region.radius()
                          : region.radius() * std::sqrt(static_cast<double>(dim_));
    return l2(gradient(region.center().span())) + 2.0 * spectral_norm_ * r2;
}

std::optional<double> AnalyticOracle::lipschitz1() const {
    if (kind_ == Kind::Affine) return 0.0;
    if (kind_ == Kind::Quadratic) return 2.0 * spectral_norm_;
    return std::nullopt;
}

const std::vector<double>& AnalyticOracle::affine_slope() const {
    require(kind_ == Kind::Affine, "AnalyticOracle: not affine");
    return linear_;
}

double gamma(double alpha) { return alpha + std::sqrt(2.0) / 2.0; }

double theorem1_step(double radius, double epsilon, double alpha, std::size_t d, double l0,
                     std::size_t iterations) {
    require(radius > 0.0 && epsilon > 0.0 && l0 > 0.0 && d >= 1,
            "theorem1_step: R, epsilon, L0 must be positive");
    const double g = gamma(alpha);
    const double dd = static_cast<double>(d);
    return std::sqrt(radius * epsilon /
                     (g * g * dd * dd * dd * l0 * l0 * l0 * static_cast<double>(iterations + 1)));
}

double mu_hat(double epsilon, std::size_t d, double l0) {
    require(epsilon > 0.0 && l0 > 0.0 && d >= 1, "mu_hat: epsilon and L0 must be positive");
    return epsilon / (std::sqrt(static_cast<double>(d)) * l0);
}

double sign_flip_bound(double l0, double nu, std::size_t d, double h) {
    require(h != 0.0, "sign_flip_bound: h must be nonzero");
    return std::min(1.0, 2.0 * l0 * nu * std::sqrt(static_cast<double>(d)) / std::fabs(h));
}

double affine_flip_probability(double h, double nu, double slope_norm) {
    if (nu == 0.0 || slope_norm == 0.0) return 0.0;
    return normal_cdf(-std::fabs(h) / (std::sqrt(2.0) * nu * slope_norm));
}

}  // namespace bbarena::theorylab

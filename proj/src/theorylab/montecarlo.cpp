#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "bbarena/numkit/error.hpp"
#include "bbarena/numkit/kernels.hpp"
#include "bbarena/theorylab/theorylab.hpp"

namespace bbarena::theorylab {

namespace {

// Streaming central moments up to order four (Terriberry's update).
struct Moments {
    double n = 0.0, mean = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;

    void add(double x) {
        const double n1 = n;
        n += 1.0;
        const double delta = x - mean;
        const double dn = delta / n;
        const double dn2 = dn * dn;
        const double term1 = delta * dn * n1;
        mean += dn;
        m4 += term1 * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * m2 - 4.0 * dn * m3;
        m3 += term1 * dn * (n - 2.0) - 3.0 * dn * m2;
        m2 += term1;
    }
    double variance() const { return n > 1.0 ? m2 / (n - 1.0) : 0.0; }
    double variance_se() const {
        const double v = m2 / n;
        return std::sqrt(std::max(0.0, m4 / n - v * v) / n);
    }
};

oracle::DefendedOracle defended(const oracle::Objective& f, double nu, RngStream rng,
                                std::size_t queries) {
    return oracle::DefendedOracle(f, oracle::DefensePolicy(nu, rng), oracle::QueryLedger(queries));
}

}  // namespace

SmoothEstimate smooth_estimate(const oracle::Objective& f, const Vector& x, double nu,
                               std::size_t samples, RngStream& rng) {
    require(samples >= 2, "smooth_estimate: need at least two samples");
    require(nu >= 0.0, "smooth_estimate: nu must be nonnegative");
    require(x.size() == f.dim(), "smooth_estimate: dimension mismatch");
    if (nu == 0.0) return {f(x), 0.0};
    const auto& k = kernels::active();
    std::vector<double> probe(x.size());
    Moments m;
    for (std::size_t s = 0; s < samples; ++s) {
        rng.fill_normal(probe);
        k.add_scaled(x.data(), nu, probe.data(), probe.data(), probe.size());
        m.add(f.value(probe));
    }
    return {m.mean, std::sqrt(m.variance() / m.n)};
}

Vector sample_in_ball(const NormBall& region, RngStream& rng) {
    const Vector& c = region.center();
    const std::size_t d = c.size();
    std::vector<double> x(d);
    if (region.kind() == NormKind::LINF) {
        for (std::size_t i = 0; i < d; ++i) x[i] = c[i] + region.radius() * (2.0 * rng.uniform() - 1.0);
        return c.with_values(std::move(x));
    }
    rng.fill_normal(x);
    const double n = std::sqrt(kernels::sum_squares(x));
    const double r = region.radius() * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
    for (std::size_t i = 0; i < d; ++i) x[i] = c[i] + r * x[i] / n;
    return c.with_values(std::move(x));
}

GapCheck smoothing_gap_check(const AnalyticOracle& f, const NormBall& region, double nu,
                             std::size_t points, std::size_t samples_per_point, RngStream& rng) {
    require(points >= 1, "smoothing_gap_check: need at least one point");
    require(nu >= 0.0, "smoothing_gap_check: nu must be nonnegative");
    GapCheck out;
    out.points = points;
    out.bound = nu * f.lipschitz0(region) * std::sqrt(static_cast<double>(f.dim()));
    out.worst_excess = -std::numeric_limits<double>::infinity();
    RngStream where = rng.child(1);
    RngStream noise = rng.child(2);
    for (std::size_t p = 0; p < points; ++p) {
        const Vector x = sample_in_ball(region, where);
        const SmoothEstimate est = smooth_estimate(f, x, nu, samples_per_point, noise);
        const double gap = std::fabs(est.mean - f(x));
        out.max_gap = std::max(out.max_gap, gap);
        out.worst_excess = std::max(out.worst_excess, gap - out.bound - 3.0 * est.std_error);
    }
    out.violated = out.worst_excess > 0.0;
    return out;
}

double EstimatorMoments::total_variance() const {
    return std::accumulate(variance.begin(), variance.end(), 0.0);
}

EstimatorMoments estimator_moments(const oracle::Objective& f, const Vector& x, double mu, double nu,
                                   std::size_t samples, RngStream& rng, std::size_t m) {
    require(samples >= 100, "estimator_moments: need at least 100 samples");
    require(mu > 0.0, "estimator_moments: mu must be positive");
    require(m >= 1, "estimator_moments: M must be at least 1");
    require(x.size() == f.dim(), "estimator_moments: dimension mismatch");
    const std::size_t d = x.size();
    RngStream directions = rng.child(1);
    auto oracle = defended(f, nu, rng.child(2), 2 * m * samples);
    const auto& k = kernels::active();

    std::vector<Moments> acc(d);
    std::vector<double> u(d), probe(d);
    for (std::size_t s = 0; s < samples; ++s) {
        directions.fill_normal(u);
        k.add_scaled(x.data(), mu, u.data(), probe.data(), d);
        const double ahead = m == 1 ? oracle.query(probe) : oracle.eot_query(probe, m);
        const double here = m == 1 ? oracle.query(x) : oracle.eot_query(x, m);
        const double scale = (ahead - here) / mu;
        for (std::size_t i = 0; i < d; ++i) acc[i].add(scale * u[i]);
    }

    EstimatorMoments out;
    out.samples = samples;
    for (const Moments& a : acc) {
        out.mean.push_back(a.mean);
        out.variance.push_back(a.variance());
        out.mean_se.push_back(std::sqrt(a.variance() / a.n));
        out.variance_se.push_back(a.variance_se());
    }
    return out;
}

double FlipRate::binomial_se(double p) const {
    return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(trials));
}

FlipRate flip_rate(const oracle::Objective& f, double l0, const Vector& x, double mu, double nu,
                   const Vector& direction, std::size_t trials, RngStream& rng) {
    require(trials >= 1, "flip_rate: need at least one trial");
    require(mu > 0.0 && nu >= 0.0, "flip_rate: mu must be positive and nu nonnegative");
    require(x.size() == f.dim() && direction.size() == f.dim(), "flip_rate: dimension mismatch");
    const Vector ahead = add_scaled(x, mu, direction.span());
    FlipRate out;
    out.trials = trials;
    out.h = f(ahead) - f(x);
    if (!(std::fabs(out.h) >= 1e-12)) {
        std::ostringstream msg;
        msg << "flip_rate: degenerate probe, |h| = " << std::fabs(out.h) << " < 1e-12";
        throw DegenerateProbe(msg.str());
    }
    out.bound = sign_flip_bound(l0, nu, f.dim(), out.h);
    out.exact_p = std::numeric_limits<double>::quiet_NaN();

    auto oracle = defended(f, nu, rng, 2 * trials);
    const bool positive = out.h > 0.0;
    std::size_t flips = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const double h_nu = oracle.query(ahead) - oracle.query(x);
        if (positive ? !(h_nu > 0.0) : !(h_nu < 0.0)) ++flips;
    }
    out.empirical_p = static_cast<double>(flips) / static_cast<double>(trials);
    return out;
}

FlipRate flip_rate(const AnalyticOracle& f, const Vector& x, double mu, double nu,
                   const Vector& direction, std::size_t trials, RngStream& rng) {
    const double reach = mu * std::sqrt(kernels::sum_squares(direction.span()));
    if (!(reach > 0.0)) throw DegenerateProbe("flip_rate: zero probe displacement");
    const NormBall region(x, reach, NormKind::L2);
    FlipRate out = flip_rate(static_cast<const oracle::Objective&>(f), f.lipschitz0(region), x, mu, nu,
                             direction, trials, rng);
    if (f.kind() == AnalyticOracle::Kind::Affine) {
        const double c_norm = std::sqrt(kernels::sum_squares(f.affine_slope()));
        out.exact_p = affine_flip_probability(out.h, nu, c_norm);
    }
    return out;
}

double lipschitz_estimate(const oracle::Objective& f, const NormBall& region, std::size_t pairs,
                          RngStream& rng) {
    require(pairs >= 1, "lipschitz_estimate: need at least one pair");
    require(region.center().size() == f.dim(), "lipschitz_estimate: dimension mismatch");
    const std::size_t d = f.dim();
    const double fd_step = 1e-6 * std::max(1.0, region.radius());
    double best = 0.0;

    auto ratio = [&](const Vector& a, const Vector& b) {
        const double dist = std::sqrt(kernels::sum_squares(difference(a, b).span()));
        return dist > 1e-12 ? std::fabs(f(a) - f(b)) / dist : -1.0;
    };

    for (std::size_t p = 0; p < pairs; ++p) {
        const Vector x = sample_in_ball(region, rng);
        double r = -1.0;
        while (r < 0.0) r = ratio(x, sample_in_ball(region, rng));
        best = std::max(best, r);

        std::vector<double> g(d);
        Vector probe = x;
        for (std::size_t i = 0; i < d; ++i) {
            probe[i] = x[i] + fd_step;
            const double up = f(probe);
            probe[i] = x[i] - fd_step;
            const double down = f(probe);
            probe[i] = x[i];
            g[i] = (up - down) / (2.0 * fd_step);
        }
        const double gn = std::sqrt(kernels::sum_squares(g));
        if (gn == 0.0) continue;
        const Vector partner =
            region.project(add_scaled(x, 0.1 * region.radius() / gn, std::span<const double>(g)));
        best = std::max(best, ratio(partner, x));
    }
    return best;
}

std::vector<double> smoothed_gradient(const oracle::Objective& f, const Vector& x, double sigma,
                                      std::size_t samples, RngStream& rng) {
    require(sigma >= 0.0, "smoothed_gradient: sigma must be nonnegative");
    require(samples >= 1, "smoothed_gradient: need at least one sample");
    const std::size_t d = x.size();
    std::vector<double> g(d, 0.0);
    if (sigma == 0.0) {
        const double step = 1e-6;
        Vector probe = x;
        for (std::size_t i = 0; i < d; ++i) {
            probe[i] = x[i] + step;
            const double up = f(probe);
            probe[i] = x[i] - step;
            const double down = f(probe);
            probe[i] = x[i];
            g[i] = (up - down) / (2.0 * step);
        }
        return g;
    }
    const auto& k = kernels::active();
    std::vector<double> w(d), plus(d), minus(d);
    for (std::size_t s = 0; s < samples; ++s) {
        rng.fill_normal(w);
        k.add_scaled(x.data(), sigma, w.data(), plus.data(), d);
        k.add_scaled(x.data(), -sigma, w.data(), minus.data(), d);
        const double weight = (f.value(plus) - f.value(minus)) / (2.0 * sigma);
        k.axpy(weight, w.data(), g.data(), d);
    }
    for (double& v : g) v /= static_cast<double>(samples);
    return g;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    require(a.size() == b.size() && a.size() >= 2, "spearman: need two equal-length samples");
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> order(v.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return v[i] < v[j]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < order.size();) {
            std::size_t j = i;
            while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const std::vector<double> ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(a.size());
    const double mean = (n + 1.0) / 2.0;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < ra.size(); ++i) {
        sab += (ra[i] - mean) * (rb[i] - mean);
        saa += (ra[i] - mean) * (ra[i] - mean);
        sbb += (rb[i] - mean) * (rb[i] - mean);
    }
    if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sab / std::sqrt(saa * sbb);
}

void write_flip_csv_header(std::ostream& out) { out << "mu,nu,d,h,empirical_p,exact_p,bound,trials\n"; }

void write_flip_csv_row(std::ostream& out, double mu, double nu, std::size_t d, const FlipRate& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%zu,%.10g,%.10g,%.10g,%.10g,%zu\n", mu, nu, d, r.h,
                  r.empirical_p, r.exact_p, r.bound, r.trials);
    out << buf;
}

void write_convergence_csv(std::ostream& out, const ConvergenceResult& result) {
    out << "alpha,trial,step,grad_norm_sq\n";
    char buf[128];
    for (const ConvergencePoint& p : result.points) {
        std::snprintf(buf, sizeof buf, "%.10g,%zu,%zu,%.10g\n", p.alpha, p.trial, p.step,
                      p.grad_norm_sq);
        out << buf;
    }
}

void write_eot_csv(std::ostream& out, const ConvergenceResult& result) {
    out << "alpha,M,trial,step,grad_norm_sq\n";
    char buf[160];
    for (const ConvergencePoint& p : result.points) {
        std::snprintf(buf, sizeof buf, "%.10g,%zu,%zu,%zu,%.10g\n", p.alpha, p.eot_m, p.trial, p.step,
                      p.grad_norm_sq);
        out << buf;
    }
}

}  // namespace bbarena::theorylab

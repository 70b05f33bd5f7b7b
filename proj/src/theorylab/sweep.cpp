#include <cmath>
#include <limits>
#include <sstream>

#include "bbarena/numkit/error.hpp"
#include "bbarena/numkit/kernels.hpp"
#include "bbarena/theorylab/theorylab.hpp"

namespace bbarena::theorylab {

namespace {

constexpr std::uint64_t kDirections = 1;
constexpr std::uint64_t kDefender = 2;
constexpr std::uint64_t kInstrument = 3;
constexpr std::uint64_t kVariance = 4;

RngStream sweep_stream(std::uint64_t seed, std::uint64_t role, std::size_t trial) {
    return RngStream(seed, RngStream::stream_key({0x7E0ull, role, trial}));
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double std_error_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

void ConvergenceSweepConfig::validate() const {
    require(!alpha_grid.empty(), "ConvergenceSweepConfig: alpha_grid must be nonempty");
    for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
        require(alpha_grid[i] >= 0.0 && std::isfinite(alpha_grid[i]),
                "ConvergenceSweepConfig: alpha values must be nonnegative");
        require(i == 0 || alpha_grid[i] > alpha_grid[i - 1],
                "ConvergenceSweepConfig: alpha_grid must be ascending");
    }
    require(mu > 0.0, "ConvergenceSweepConfig: mu must be positive");
    require(epsilon > 0.0, "ConvergenceSweepConfig: epsilon must be positive");
    require(radius > 0.0, "ConvergenceSweepConfig: R must be positive");
    require(iterations >= 1, "ConvergenceSweepConfig: Q must be at least 1");
    require(trials >= 1, "ConvergenceSweepConfig: trials must be at least 1");
    require(eot_m >= 1, "ConvergenceSweepConfig: M must be at least 1");
    require(smoothing_samples >= 1, "ConvergenceSweepConfig: smoothing_samples must be positive");
    require(step_rule != StepRule::Constant || eta > 0.0,
            "ConvergenceSweepConfig: constant step needs eta > 0");
}

double sweep_step(const AnalyticOracle& f, const Vector& start, const ConvergenceSweepConfig& cfg,
                  double alpha) {
    if (cfg.step_rule == StepRule::Constant) return cfg.eta;
    const NormBall region(start, cfg.radius, NormKind::L2);
    const double l0 = f.lipschitz0(region);
    const double limit = mu_hat(cfg.epsilon, f.dim(), l0);
    if (cfg.mu > limit) {
        std::ostringstream msg;
        msg << "convergence sweep: mu = " << cfg.mu << " exceeds mu_hat = eps / (sqrt(d) L0) = "
            << limit << " (eps=" << cfg.epsilon << ", d=" << f.dim() << ", L0=" << l0 << ")";
        throw ContractViolation(msg.str());
    }
    return theorem1_step(cfg.radius, cfg.epsilon, alpha, f.dim(), l0, cfg.iterations);
}

std::vector<Vector> zo_descent(const AnalyticOracle& f, const Vector& start,
                               const ConvergenceSweepConfig& cfg, double alpha, std::size_t m,
                               std::size_t trial, bool through_defense) {
    cfg.validate();
    require(start.size() == f.dim(), "zo_descent: start dimension mismatch");
    require(m >= 1, "zo_descent: M must be at least 1");
    const double nu = alpha * cfg.mu;
    require(through_defense || nu == 0.0, "zo_descent: the undefended path requires nu = 0");
    const double eta = sweep_step(f, start, cfg, alpha);
    const NormBall region(start, cfg.radius, NormKind::L2);
    const std::size_t d = f.dim();

    RngStream directions = sweep_stream(cfg.seed, kDirections, trial);
    oracle::DefendedOracle oracle(f, oracle::DefensePolicy(nu, sweep_stream(cfg.seed, kDefender, trial)),
                                  oracle::QueryLedger(2 * m * cfg.iterations));
    auto evaluate = [&](std::span<const double> x) {
        if (!through_defense) return f.value(x);
        return m == 1 ? oracle.query(x) : oracle.eot_query(x, m);
    };

    const auto& k = kernels::active();
    std::vector<Vector> trajectory{start};
    trajectory.reserve(cfg.iterations + 1);
    std::vector<double> u(d), probe(d);
    Vector x = start;
    for (std::size_t t = 0; t < cfg.iterations; ++t) {
        directions.fill_normal(u);
        k.add_scaled(x.data(), cfg.mu, u.data(), probe.data(), d);
        const double ahead = evaluate(probe);
        const double here = evaluate(x.span());
        const double scale = (ahead - here) / cfg.mu;
        k.axpy(-eta * scale, u.data(), x.data(), d);
        x = region.project(x);
        trajectory.push_back(x);
    }
    return trajectory;
}

std::vector<double> smoothed_gradient_norms(const AnalyticOracle& f,
                                            const std::vector<Vector>& trajectory, double mu,
                                            double nu, std::size_t samples, std::uint64_t seed,
                                            std::size_t trial) {
    const double sigma = std::sqrt(mu * mu + nu * nu);
    std::vector<double> out;
    out.reserve(trajectory.size());
    for (std::size_t t = 0; t < trajectory.size(); ++t) {
        RngStream rng(seed, RngStream::stream_key({0x7E0ull, kInstrument, trial, t}));
        out.push_back(kernels::sum_squares(smoothed_gradient(f, trajectory[t], sigma, samples, rng)));
    }
    return out;
}

namespace {

ConvergenceSummary run_cell(const AnalyticOracle& f, const Vector& start,
                            const ConvergenceSweepConfig& cfg, double alpha, std::size_t m,
                            std::vector<ConvergencePoint>& points) {
    ConvergenceSummary row{alpha, m, sweep_step(f, start, cfg, alpha), 0.0, 0.0, {},
                           std::numeric_limits<double>::quiet_NaN()};
    for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
        const auto trajectory = zo_descent(f, start, cfg, alpha, m, trial);
        const auto norms = smoothed_gradient_norms(f, trajectory, cfg.mu, alpha * cfg.mu,
                                                   cfg.smoothing_samples, cfg.seed, trial);
        for (std::size_t t = 0; t < norms.size(); ++t) points.push_back({alpha, m, trial, t, norms[t]});
        row.trial_metrics.push_back(mean_of(norms));
    }
    row.mean_metric = mean_of(row.trial_metrics);
    row.std_error = std_error_of(row.trial_metrics);
    return row;
}

}  // namespace

ConvergenceResult convergence_sweep(const AnalyticOracle& f, const Vector& start,
                                    const ConvergenceSweepConfig& cfg) {
    cfg.validate();
    ConvergenceResult result;
    for (double alpha : cfg.alpha_grid)
        result.summary.push_back(run_cell(f, start, cfg, alpha, cfg.eot_m, result.points));
    return result;
}

ConvergenceResult eot_sweep(const AnalyticOracle& f, const Vector& start,
                            const ConvergenceSweepConfig& cfg, const std::vector<std::size_t>& m_grid) {
    cfg.validate();
    require(!m_grid.empty(), "eot_sweep: M grid must be nonempty");
    for (std::size_t i = 0; i < m_grid.size(); ++i)
        require(m_grid[i] >= 1 && (i == 0 || m_grid[i] > m_grid[i - 1]),
                "eot_sweep: M grid must be ascending and at least 1");
    ConvergenceResult result;
    for (double alpha : cfg.alpha_grid) {
        for (std::size_t m : m_grid) {
            ConvergenceSummary row = run_cell(f, start, cfg, alpha, m, result.points);
            RngStream rng = sweep_stream(cfg.seed, kVariance, 0);
            row.estimator_variance =
                estimator_moments(f, start, cfg.mu, alpha * cfg.mu, cfg.variance_samples, rng, m)
                    .total_variance();
            result.summary.push_back(std::move(row));
        }
    }
    return result;
}

}  // namespace bbarena::theorylab

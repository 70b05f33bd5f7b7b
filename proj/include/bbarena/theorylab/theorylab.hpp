#pragma once

// Monte Carlo checks of the random-noise-defense analysis against objectives
// whose Lipschitz constants, gradients and smoothed values are known in closed
// form.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "bbarena/numkit/ball.hpp"
#include "bbarena/numkit/rng.hpp"
#include "bbarena/oracle/oracle.hpp"

namespace bbarena::theorylab {

class AnalyticOracle final : public oracle::Objective {
public:
    enum class Kind { Affine, Quadratic, PiecewiseMax };

    /// f(x) = c.x + b
    static AnalyticOracle affine(std::vector<double> c, double b = 0.0);
    /// f(x) = x^T A x + b.x with A given row-major (d x d); A is symmetrized.
    static AnalyticOracle quadratic(std::vector<double> a, std::vector<double> b);
    /// curvature * ||x - minimizer||^2 without its constant term.
    static AnalyticOracle bowl(const Vector& minimizer, double curvature);
    /// f(x) = max_k c_k.x
    static AnalyticOracle piecewise_max(std::vector<std::vector<double>> slopes);

    Kind kind() const { return kind_; }
    std::size_t dim() const override { return dim_; }
    double value(std::span<const double> x) const override;
    std::vector<double> gradient(std::span<const double> x) const;

    /// Lipschitz constant of f over `region`. Exact for AFFINE (||c||) and
    /// PIECEWISE_MAX (max_k ||c_k||); for QUADRATIC the bound
    /// ||2 A center + b|| + 2 ||A|| r_2, where r_2 is the region's L2 radius,
    /// which is attained when A is a multiple of the identity.
    double lipschitz0(const NormBall& region) const;
    /// Region-free Lipschitz constant; AFFINE and PIECEWISE_MAX only.
    double lipschitz0() const;
    /// Lipschitz constant of the gradient: 0 for AFFINE, 2 ||A||_2 for QUADRATIC.
    std::optional<double> lipschitz1() const;

    const std::vector<double>& affine_slope() const;

private:
    AnalyticOracle(Kind kind, std::size_t dim) : kind_(kind), dim_(dim) {}

    Kind kind_;
    std::size_t dim_;
    std::vector<double> linear_;               // c (affine) or b (quadratic)
    double offset_ = 0.0;                      // affine b
    std::vector<double> matrix_;               // symmetric A, row-major
    std::vector<std::vector<double>> slopes_;  // piecewise max
    double spectral_norm_ = 0.0;
};

// Closed forms used as oracles.
double gamma(double alpha);
/// Constant step eta = [R eps / (gamma(alpha)^2 d^3 L0^3 (Q + 1))]^(1/2).
double theorem1_step(double radius, double epsilon, double alpha, std::size_t d, double l0,
                     std::size_t iterations);
/// Largest probe scale keeping |f_{mu,nu} - f_nu| <= eps: eps / (sqrt(d) L0).
double mu_hat(double epsilon, std::size_t d, double l0);
/// min(1, 2 L0 nu sqrt(d) / |h|).
double sign_flip_bound(double l0, double nu, std::size_t d, double h);
/// Exact flip probability for an affine objective with slope norm ||c||:
/// Phi(-|h| / (sqrt(2) nu ||c||)); 0 when nu = 0.
double affine_flip_probability(double h, double nu, double slope_norm);

struct SmoothEstimate {
    double mean;
    double std_error;
};

/// Monte Carlo f_nu(x) = E f(x + nu v). nu = 0 returns (f(x), 0) exactly.
SmoothEstimate smooth_estimate(const oracle::Objective& f, const Vector& x, double nu,
                               std::size_t samples, RngStream& rng);

struct GapCheck {
    double max_gap = 0.0;        // max |f_nu - f| over points
    double bound = 0.0;          // nu L0 sqrt(d)
    double worst_excess = 0.0;   // max over points of gap - bound - 3 SE (<= 0 when satisfied)
    std::size_t points = 0;
    bool violated = false;
};

/// Samples `points` locations uniformly from `region` and checks
/// |f_nu(x) - f(x)| <= nu L0 sqrt(d) + 3 SE at each.
GapCheck smoothing_gap_check(const AnalyticOracle& f, const NormBall& region, double nu,
                             std::size_t points, std::size_t samples_per_point, RngStream& rng);

struct EstimatorMoments {
    std::vector<double> mean;
    std::vector<double> variance;
    std::vector<double> mean_se;      // sqrt(variance / n)
    std::vector<double> variance_se;  // sqrt((m4 - variance^2) / n)
    std::size_t samples = 0;
    double total_variance() const;
};

/// Moments of g = [F(x + mu u) - F(x)] / mu * u where every F is a defended
/// evaluation f(. + nu v) with fresh v, averaged over m repeats when m > 1.
EstimatorMoments estimator_moments(const oracle::Objective& f, const Vector& x, double mu, double nu,
                                   std::size_t samples, RngStream& rng, std::size_t m = 1);

struct FlipRate {
    double h = 0.0;
    double empirical_p = 0.0;
    double exact_p = 0.0;  // NaN unless the objective is affine
    double bound = 0.0;
    std::size_t trials = 0;
    double binomial_se(double p) const;
};

/// Fraction of trials where sign(f(x+mu u+nu v1) - f(x+nu v2)) differs from
/// sign(h), h = f(x + mu u) - f(x). Throws DegenerateProbe when |h| < 1e-12.
FlipRate flip_rate(const oracle::Objective& f, double l0, const Vector& x, double mu, double nu,
                   const Vector& direction, std::size_t trials, RngStream& rng);
/// Same, with analytic L0 and (for AFFINE) the exact flip probability.
FlipRate flip_rate(const AnalyticOracle& f, const Vector& x, double mu, double nu,
                   const Vector& direction, std::size_t trials, RngStream& rng);

/// Largest |f(y) - f(x)| / ||y - x|| over sampled pairs in `region`: for each
/// of `pairs` base points, one random partner and one partner along a
/// finite-difference gradient. Always a lower bound on L0.
double lipschitz_estimate(const oracle::Objective& f, const NormBall& region, std::size_t pairs,
                          RngStream& rng);

/// Uniform sample from the ball (box for LINF, radial law for L2).
Vector sample_in_ball(const NormBall& region, RngStream& rng);

/// Antithetic Monte Carlo gradient of the Gaussian smoothing of f at scale
/// sigma; sigma = 0 falls back to a central difference of f.
std::vector<double> smoothed_gradient(const oracle::Objective& f, const Vector& x, double sigma,
                                      std::size_t samples, RngStream& rng);

enum class StepRule { Theorem1, Constant };

struct ConvergenceSweepConfig {
    std::vector<double> alpha_grid{0.0, 1.0, 5.0, 20.0};
    double mu = 1e-3;
    std::size_t iterations = 100;  // Q; iterates x_0 .. x_Q
    double epsilon = 0.01;
    double radius = 1.0;           // L2 ball around the start point
    StepRule step_rule = StepRule::Theorem1;
    double eta = 0.01;             // used by StepRule::Constant
    std::size_t trials = 10;
    std::size_t eot_m = 1;
    std::size_t smoothing_samples = 10000;
    std::size_t variance_samples = 20000;
    std::uint64_t seed = 0;

    void validate() const;
};

struct ConvergencePoint {
    double alpha;
    std::size_t eot_m;
    std::size_t trial;
    std::size_t step;
    double grad_norm_sq;
};

struct ConvergenceSummary {
    double alpha;
    std::size_t eot_m;
    double eta;
    double mean_metric;        // mean over trials of the time-averaged ||grad f_{mu,nu}||^2
    double std_error;
    std::vector<double> trial_metrics;
    double estimator_variance;  // trace of Var(g) at the start point (eot_sweep only, else NaN)
};

struct ConvergenceResult {
    std::vector<ConvergencePoint> points;
    std::vector<ConvergenceSummary> summary;
};

/// Step size the sweep will use for a given alpha. Under StepRule::Theorem1
/// it requires mu <= mu_hat and reports mu_hat in the error otherwise.
double sweep_step(const AnalyticOracle& f, const Vector& start, const ConvergenceSweepConfig& cfg,
                  double alpha);

/// x_0..x_Q of the projected zeroth-order descent with the defended one-sided
/// estimator at noise nu = alpha * mu and m EOT repeats. Streams are keyed by
/// (seed, trial) only. With through_defense = false the estimator calls f
/// directly (requires nu = 0).
std::vector<Vector> zo_descent(const AnalyticOracle& f, const Vector& start,
                               const ConvergenceSweepConfig& cfg, double alpha, std::size_t m,
                               std::size_t trial, bool through_defense = true);

/// ||grad f_{mu,nu}(x_t)||^2 along a trajectory, estimated defender-side.
std::vector<double> smoothed_gradient_norms(const AnalyticOracle& f,
                                            const std::vector<Vector>& trajectory, double mu,
                                            double nu, std::size_t samples, std::uint64_t seed,
                                            std::size_t trial);

ConvergenceResult convergence_sweep(const AnalyticOracle& f, const Vector& start,
                                    const ConvergenceSweepConfig& cfg);
/// convergence_sweep repeated for each M with the averaged estimator; adds the
/// estimator variance at the start point to each summary row.
ConvergenceResult eot_sweep(const AnalyticOracle& f, const Vector& start,
                            const ConvergenceSweepConfig& cfg, const std::vector<std::size_t>& m_grid);

/// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& a, const std::vector<double>& b);

// CSV writers.
void write_flip_csv_header(std::ostream& out);
void write_flip_csv_row(std::ostream& out, double mu, double nu, std::size_t d, const FlipRate& r);
void write_convergence_csv(std::ostream& out, const ConvergenceResult& result);
/// Same with an M column after alpha.
void write_eot_csv(std::ostream& out, const ConvergenceResult& result);

}  // namespace bbarena::theorylab

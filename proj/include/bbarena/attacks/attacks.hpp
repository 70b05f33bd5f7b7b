#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <string_view>
#include <vector>

#include "bbarena/numkit/ball.hpp"
#include "bbarena/numkit/rng.hpp"
#include "bbarena/oracle/oracle.hpp"

namespace bbarena::attacks {

enum class AttackKind { Nes, ZoSign, Simba, Square, SignHunter };

std::string_view to_string(AttackKind kind);
/// Accepts NES, ZOSIGN (or ZS), SIMBA, SQUARE, SIGNHUNTER, case-insensitive.
AttackKind parse_attack_kind(std::string_view text);

enum class GradientEstimator {
    Antithetic,  // [f(x + mu u) - f(x - mu u)] / (2 mu) u
    OneSided,    // [f(x + mu u) - f(x)] / mu u
};

/// How search attacks obtain the loss they compare a proposal against.
enum class BaselineMode {
    Cached,  // reuse the stored (noisy) best value
    Paired,  // re-query the current point before every comparison
};

/// Square side schedule entry: once `budget_fraction` of the query budget is
/// spent, the side fraction becomes mu * `mu_factor`.
struct SquareScheduleStep {
    double budget_fraction;
    double mu_factor;
};

std::vector<SquareScheduleStep> default_square_schedule();

struct AttackConfig {
    NormKind norm = NormKind::LINF;
    double radius = 0.05;
    /// Probe scale: finite-difference step (NES, ZO-signSGD), coordinate step
    /// (SimBA), initial side fraction (Square). SignHunter probes with the ball
    /// radius itself and ignores it.
    double mu = 1e-3;
    double eta = 5e-4;
    std::size_t max_queries = 10000;
    std::size_t samples_per_step = 10;
    std::size_t eot_m = 1;
    std::vector<SquareScheduleStep> square_schedule = default_square_schedule();
    std::uint64_t seed = 0;
    GradientEstimator estimator = GradientEstimator::Antithetic;
    BaselineMode baseline = BaselineMode::Cached;

    void validate() const;
};

/// Attacker-visible result plus defender-side truth (filled in by the caller
/// that owns the noiseless objective; NaN/false until then).
struct AttackOutcome {
    bool success = false;
    bool true_success = false;
    std::size_t queries_used = 0;
    std::size_t iterations = 0;
    Vector x_adv{0.0};
    double final_true_margin = std::numeric_limits<double>::quiet_NaN();
    double perturbation_norm = 0.0;
};

struct TraceRecord {
    std::size_t iteration;
    std::size_t queries_used;
    double observed_loss;
};

/// Per-run iteration log. The terminal summary mirrors the outcome so runs
/// can be re-aggregated from traces alone.
struct AttackTrace {
    std::vector<TraceRecord> records;
    bool finished = false;
    bool success = false;
    std::size_t queries_used = 0;
    std::size_t iterations = 0;

    /// JSON lines: one {"iteration","queries_used","observed_loss"} object per
    /// record, then {"final":true,"success":...,"queries_used":...,"iterations":...}.
    void write_jsonl(std::ostream& out) const;
    static AttackTrace read_jsonl(std::istream& in);
};

AttackOutcome nes_attack(oracle::DefendedOracle& oracle, const Vector& x0, const AttackConfig& cfg,
                         AttackTrace* trace = nullptr);
AttackOutcome zo_signsgd_attack(oracle::DefendedOracle& oracle, const Vector& x0,
                                const AttackConfig& cfg, AttackTrace* trace = nullptr);
/// L2 only.
AttackOutcome simba_attack(oracle::DefendedOracle& oracle, const Vector& x0, const AttackConfig& cfg,
                           AttackTrace* trace = nullptr);
AttackOutcome signhunter_attack(oracle::DefendedOracle& oracle, const Vector& x0,
                                const AttackConfig& cfg, AttackTrace* trace = nullptr);
/// LINF only. Uses square windows when x0 carries image shape, contiguous
/// segments of length ceil(p * d) otherwise.
AttackOutcome square_attack(oracle::DefendedOracle& oracle, const Vector& x0,
                            const AttackConfig& cfg, AttackTrace* trace = nullptr);

AttackOutcome run_attack(AttackKind kind, oracle::DefendedOracle& oracle, const Vector& x0,
                         const AttackConfig& cfg, AttackTrace* trace = nullptr);

/// The zeroth-order estimate used by NES and ZO-signSGD at x, averaged over
/// cfg.samples_per_step Gaussian directions drawn from `directions`. Each
/// probe is an eot_query with cfg.eot_m repeats when eot_m > 1.
std::vector<double> estimate_gradient(oracle::DefendedOracle& oracle, const Vector& x,
                                      const AttackConfig& cfg, RngStream& directions);

/// Queries one gradient step of kind NES/ZO-signSGD costs (estimate + success check).
std::size_t zo_step_cost(const AttackConfig& cfg);

/// The attacker's private stream for a given attack and seed.
RngStream attacker_stream(AttackKind kind, std::uint64_t seed);

}  // namespace bbarena::attacks

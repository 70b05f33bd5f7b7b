#pragma once

#include <algorithm>
#include <cmath>

#include "bbarena/attacks/attacks.hpp"
#include "bbarena/numkit/error.hpp"

namespace bbarena::attacks::detail {

// Bookkeeping shared by every attack: feasible set, probe costs, trace and
// outcome assembly.
class RunState {
public:
    RunState(oracle::DefendedOracle& oracle, const Vector& x0, const AttackConfig& cfg,
             AttackTrace* trace)
        : oracle_(oracle),
          x0_(x0),
          cfg_(cfg),
          trace_(trace),
          ball_(x0, cfg.radius, cfg.norm),
          start_count_(oracle.queries_used()) {
        cfg.validate();
        require(x0.size() == oracle.dim(), "attack: x0 dimension does not match the oracle");
        if (trace_) *trace_ = AttackTrace{};
    }

    const NormBall& ball() const { return ball_; }
    const Vector& x0() const { return x0_; }
    const AttackConfig& cfg() const { return cfg_; }
    oracle::DefendedOracle& oracle() { return oracle_; }

    std::size_t used() const { return oracle_.queries_used() - start_count_; }
    /// The smaller of the ledger's remaining budget and cfg.max_queries - used().
    std::size_t remaining() const {
        return std::min(oracle_.remaining(), cfg_.max_queries - std::min(cfg_.max_queries, used()));
    }
    bool can_afford(std::size_t n) const { return remaining() >= n; }

    /// Probe value: a single defended query, or an M-average under EOT.
    double probe(const Vector& x) {
        return cfg_.eot_m > 1 ? oracle_.eot_query(x, cfg_.eot_m) : oracle_.query(x);
    }
    std::size_t probe_cost() const { return cfg_.eot_m; }

    void record(std::size_t iteration, double observed_loss) {
        if (trace_) trace_->records.push_back({iteration, used(), observed_loss});
    }

    AttackOutcome finish(const Vector& x_adv, bool success, std::size_t iterations) {
        AttackOutcome out;
        out.success = success;
        out.queries_used = used();
        out.iterations = iterations;
        out.x_adv = x_adv;
        out.perturbation_norm = ball_.distance_from_center(x_adv);
        if (trace_) {
            trace_->finished = true;
            trace_->success = success;
            trace_->queries_used = out.queries_used;
            trace_->iterations = iterations;
        }
        return out;
    }

private:
    oracle::DefendedOracle& oracle_;
    const Vector& x0_;
    const AttackConfig& cfg_;
    AttackTrace* trace_;
    NormBall ball_;
    std::size_t start_count_;
};

}  // namespace bbarena::attacks::detail

#include <cmath>

#include "bbarena/attacks/attacks.hpp"
#include "bbarena/numkit/kernels.hpp"
#include "run_state.hpp"

namespace bbarena::attacks {

std::size_t zo_step_cost(const AttackConfig& cfg) {
    const std::size_t q = cfg.samples_per_step;
    const std::size_t probes = cfg.estimator == GradientEstimator::Antithetic ? 2 * q : q + 1;
    return probes * cfg.eot_m + 1;
}

std::vector<double> estimate_gradient(oracle::DefendedOracle& oracle, const Vector& x,
                                      const AttackConfig& cfg, RngStream& directions) {
    const std::size_t d = x.size();
    const std::size_t q = cfg.samples_per_step;
    const auto& k = kernels::active();
    auto probe = [&](const Vector& point) {
        return cfg.eot_m > 1 ? oracle.eot_query(point, cfg.eot_m) : oracle.query(point);
    };

    std::vector<double> grad(d, 0.0);
    std::vector<double> u(d);
    Vector plus = x;
    Vector minus = x;
    const bool antithetic = cfg.estimator == GradientEstimator::Antithetic;
    const double baseline = antithetic ? 0.0 : probe(x);
    for (std::size_t i = 0; i < q; ++i) {
        directions.fill_normal(u);
        k.add_scaled(x.data(), cfg.mu, u.data(), plus.data(), d);
        double weight;
        if (antithetic) {
            k.add_scaled(x.data(), -cfg.mu, u.data(), minus.data(), d);
            const double f_plus = probe(plus);
            const double f_minus = probe(minus);
            weight = (f_plus - f_minus) / (2.0 * cfg.mu);
        } else {
            weight = (probe(plus) - baseline) / cfg.mu;
        }
        k.axpy(weight / static_cast<double>(q), u.data(), grad.data(), d);
    }
    return grad;
}

namespace {

enum class StepRule { NesStep, SignStep };

AttackOutcome zo_attack(StepRule rule, AttackKind kind, oracle::DefendedOracle& oracle,
                        const Vector& x0, const AttackConfig& cfg, AttackTrace* trace) {
    detail::RunState run(oracle, x0, cfg, trace);
    RngStream directions = attacker_stream(kind, cfg.seed);
    const std::size_t d = x0.size();
    const std::size_t step_cost = zo_step_cost(cfg);

    Vector x = clamp01(x0);
    bool success = false;
    std::size_t iteration = 0;
    std::vector<double> step(d);
    try {
        while (!success && run.can_afford(step_cost)) {
            const std::vector<double> grad = estimate_gradient(oracle, x, cfg, directions);
            double scale = cfg.eta;
            if (rule == StepRule::SignStep || cfg.norm == NormKind::LINF) {
                for (std::size_t i = 0; i < d; ++i)
                    step[i] = grad[i] > 0.0 ? 1.0 : (grad[i] < 0.0 ? -1.0 : 0.0);
            } else {
                const double n = norm(grad, NormKind::L2);
                if (n > 0.0) scale /= n;
                step = grad;
            }
            x = run.ball().project_clamped(add_scaled(x, -scale, step));
            ++iteration;
            const double observed = oracle.query(x);
            run.record(iteration, observed);
            success = observed < 0.0;
        }
    } catch (const BudgetExhausted&) {
        // Fewer queries left than the pre-check assumed; keep the last iterate.
    }
    return run.finish(x, success, iteration);
}

}  // namespace

AttackOutcome nes_attack(oracle::DefendedOracle& oracle, const Vector& x0, const AttackConfig& cfg,
                         AttackTrace* trace) {
    return zo_attack(StepRule::NesStep, AttackKind::Nes, oracle, x0, cfg, trace);
}

AttackOutcome zo_signsgd_attack(oracle::DefendedOracle& oracle, const Vector& x0,
                                const AttackConfig& cfg, AttackTrace* trace) {
    return zo_attack(StepRule::SignStep, AttackKind::ZoSign, oracle, x0, cfg, trace);
}

}  // namespace bbarena::attacks

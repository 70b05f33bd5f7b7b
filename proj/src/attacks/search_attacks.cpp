#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "bbarena/attacks/attacks.hpp"
#include "bbarena/netmod/train.hpp"
#include "run_state.hpp"

namespace bbarena::attacks {

namespace {

// Baseline for one comparison: the cached best, or a fresh probe of the
// current point in paired mode.
double comparison_baseline(detail::RunState& run, const Vector& current, double cached) {
    return run.cfg().baseline == BaselineMode::Paired ? run.probe(current) : cached;
}

// One comparison plus the fresh success check that follows an acceptance.
std::size_t comparison_cost(const detail::RunState& run) {
    return (run.cfg().baseline == BaselineMode::Paired ? 2 * run.probe_cost() : run.probe_cost()) + 1;
}

// Initial probe of a search attack; the stored value seeds the cached baseline.
std::optional<double> initial_probe(detail::RunState& run, const Vector& x) {
    if (!run.can_afford(run.probe_cost() + 1)) return std::nullopt;
    return run.probe(x);
}

}  // namespace

AttackOutcome simba_attack(oracle::DefendedOracle& oracle, const Vector& x0, const AttackConfig& cfg,
                           AttackTrace* trace) {
    require(cfg.norm == NormKind::L2, "simba_attack: SimBA is defined for the L2 ball only");
    detail::RunState run(oracle, x0, cfg, trace);
    RngStream rng = attacker_stream(AttackKind::Simba, cfg.seed);
    const std::size_t d = x0.size();

    Vector x = clamp01(x0);
    std::size_t iteration = 0;
    bool success = false;
    try {
        const auto first = initial_probe(run, x);
        if (!first) return run.finish(x, false, 0);
        double best = *first;
        run.record(iteration, best);
        success = oracle.observed_success(x);

        std::vector<std::size_t> order;
        std::size_t pos = d;
        while (!success && run.can_afford(comparison_cost(run))) {
            if (pos == d) {
                order = netmod::shuffled_indices(d, rng);
                pos = 0;
            }
            const std::size_t coord = order[pos++];
            ++iteration;
            bool accepted = false;
            for (const double direction : {1.0, -1.0}) {
                Vector candidate = x;
                candidate[coord] += direction * cfg.mu;
                candidate = run.ball().project_clamped(candidate);
                if (candidate == x) continue;
                if (!run.can_afford(comparison_cost(run))) break;
                const double baseline = comparison_baseline(run, x, best);
                const double value = run.probe(candidate);
                if (value < baseline) {
                    x = std::move(candidate);
                    best = value;
                    accepted = true;
                    break;
                }
                if (run.cfg().baseline == BaselineMode::Paired) best = baseline;
            }
            run.record(iteration, best);
            if (accepted) success = oracle.observed_success(x);
        }
    } catch (const BudgetExhausted&) {
    }
    return run.finish(x, success, iteration);
}

AttackOutcome signhunter_attack(oracle::DefendedOracle& oracle, const Vector& x0,
                                const AttackConfig& cfg, AttackTrace* trace) {
    detail::RunState run(oracle, x0, cfg, trace);
    const std::size_t d = x0.size();
    const double magnitude =
        cfg.norm == NormKind::LINF ? cfg.radius : cfg.radius / std::sqrt(static_cast<double>(d));

    std::vector<double> signs(d, 1.0);
    auto candidate_for = [&](const std::vector<double>& s) {
        Vector c = x0;
        for (std::size_t i = 0; i < d; ++i) c[i] += magnitude * s[i];
        return run.ball().project_clamped(c);
    };

    Vector x = candidate_for(signs);
    std::size_t iteration = 0;
    bool success = false;
    try {
        const auto first = initial_probe(run, x);
        if (!first) return run.finish(clamp01(x0), false, 0);
        double best = *first;
        run.record(iteration, best);
        success = oracle.observed_success(x);

        // Blocks of the current tree level; a block of size one is a leaf and is
        // not split again, so one sweep flips 2d - 1 blocks.
        using Block = std::pair<std::size_t, std::size_t>;
        std::vector<Block> level{{0, d}};
        std::size_t next_block = 0;
        while (!success && run.can_afford(comparison_cost(run))) {
            if (next_block == level.size()) {
                std::vector<Block> children;
                for (const auto& [lo, hi] : level) {
                    if (hi - lo < 2) continue;
                    const std::size_t mid = lo + (hi - lo + 1) / 2;
                    children.emplace_back(lo, mid);
                    children.emplace_back(mid, hi);
                }
                level = children.empty() ? std::vector<Block>{{0, d}} : std::move(children);
                next_block = 0;
            }
            const auto [lo, hi] = level[next_block++];
            ++iteration;
            std::vector<double> flipped = signs;
            for (std::size_t i = lo; i < hi; ++i) flipped[i] = -flipped[i];
            Vector proposal = candidate_for(flipped);
            const double baseline = comparison_baseline(run, x, best);
            const double value = run.probe(proposal);
            const bool accepted = value < baseline;
            if (accepted) {
                signs = std::move(flipped);
                x = std::move(proposal);
                best = value;
            } else if (cfg.baseline == BaselineMode::Paired) {
                best = baseline;
            }
            run.record(iteration, best);
            if (accepted) success = oracle.observed_success(x);
        }
    } catch (const BudgetExhausted&) {
    }
    return run.finish(x, success, iteration);
}

AttackOutcome square_attack(oracle::DefendedOracle& oracle, const Vector& x0,
                            const AttackConfig& cfg, AttackTrace* trace) {
    require(cfg.norm == NormKind::LINF, "square_attack: only the LINF ball is supported");
    detail::RunState run(oracle, x0, cfg, trace);
    RngStream rng = attacker_stream(AttackKind::Square, cfg.seed);
    const std::size_t d = x0.size();
    const double r = cfg.radius;

    // Layout: an image (rows x cols x channels) or a single row of d pixels.
    const ImageShape shape = x0.shape().value_or(ImageShape{1, d, 1});
    const std::size_t extent = x0.shape() ? std::min(shape.height, shape.width) : d;

    // Vertical stripes: one sign per (column, channel).
    std::vector<double> delta(d);
    for (std::size_t col = 0; col < shape.width; ++col)
        for (std::size_t ch = 0; ch < shape.channels; ++ch) {
            const double s = r * rng.sign();
            for (std::size_t row = 0; row < shape.height; ++row) delta[shape.index(row, col, ch)] = s;
        }
    auto point_for = [&](const std::vector<double>& dl) {
        Vector p = x0;
        for (std::size_t i = 0; i < d; ++i) p[i] += dl[i];
        return clamp01(std::move(p));
    };

    auto side_fraction = [&]() {
        const double spent = static_cast<double>(run.used()) / static_cast<double>(cfg.max_queries);
        double factor = 1.0;
        for (const SquareScheduleStep& step : cfg.square_schedule)
            if (spent >= step.budget_fraction) factor = step.mu_factor;
        return cfg.mu * factor;
    };

    Vector x = point_for(delta);
    std::size_t iteration = 0;
    bool success = false;
    try {
        const auto first = initial_probe(run, x);
        if (!first) return run.finish(clamp01(x0), false, 0);
        double best = *first;
        run.record(iteration, best);
        success = oracle.observed_success(x);

        while (!success && run.can_afford(comparison_cost(run))) {
            const auto side = std::clamp<std::size_t>(
                static_cast<std::size_t>(std::ceil(side_fraction() * static_cast<double>(extent))),
                1, extent);
            const std::size_t row0 = x0.shape() ? rng.uniform_index(shape.height - side + 1) : 0;
            const std::size_t col0 = rng.uniform_index(shape.width - side + 1);
            const std::size_t rows = x0.shape() ? side : 1;

            std::vector<double> proposal = delta;
            bool changed = false;
            for (int attempt = 0; attempt < 10 && !changed; ++attempt) {
                for (std::size_t ch = 0; ch < shape.channels; ++ch) {
                    const double s = r * rng.sign();
                    for (std::size_t row = row0; row < row0 + rows; ++row)
                        for (std::size_t col = col0; col < col0 + side; ++col) {
                            const std::size_t i = shape.index(row, col, ch);
                            proposal[i] = s;
                            changed = changed || s != delta[i];
                        }
                }
            }
            ++iteration;
            if (!changed) continue;
            Vector candidate = point_for(proposal);
            const double baseline = comparison_baseline(run, x, best);
            const double value = run.probe(candidate);
            const bool accepted = value < baseline;
            if (accepted) {
                delta = std::move(proposal);
                x = std::move(candidate);
                best = value;
            } else if (cfg.baseline == BaselineMode::Paired) {
                best = baseline;
            }
            run.record(iteration, best);
            if (accepted) success = oracle.observed_success(x);
        }
    } catch (const BudgetExhausted&) {
    }
    return run.finish(x, success, iteration);
}

}  // namespace bbarena::attacks

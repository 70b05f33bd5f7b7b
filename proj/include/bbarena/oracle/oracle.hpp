#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "bbarena/netmod/model.hpp"
#include "bbarena/numkit/rng.hpp"
#include "bbarena/numkit/vector.hpp"

namespace bbarena::oracle {

/// A real-valued loss over inputs. Negative means the attacker has won.
class Objective {
public:
    virtual ~Objective() = default;
    virtual std::size_t dim() const = 0;
    virtual double value(std::span<const double> x) const = 0;
    double operator()(const Vector& x) const { return value(x.span()); }
};

enum class OutputSpace { Logit, Softmax };
OutputSpace parse_output_space(std::string_view text);

/// Untargeted: M_y(x) - max_{j != y} M_j(x).
/// Targeted at h: max_{j != h} M_j(x) - M_h(x).
/// M is either the logits or their softmax.
class MarginOracle final : public Objective {
public:
    MarginOracle(const netmod::MlpModel& model, std::size_t true_label,
                 OutputSpace space = OutputSpace::Logit,
                 std::optional<std::size_t> target_label = std::nullopt);

    std::size_t dim() const override { return model_->input_dim(); }
    double value(std::span<const double> x) const override;
    /// Exact noiseless margin. Defender-side only: never handed to attacks.
    double margin(const Vector& x) const { return value(x.span()); }

    std::size_t true_label() const { return true_label_; }

    static double margin_from_scores(std::span<const double> scores, std::size_t true_label,
                                     std::optional<std::size_t> target_label = std::nullopt);

private:
    const netmod::MlpModel* model_;
    std::size_t true_label_;
    OutputSpace space_;
    std::optional<std::size_t> target_label_;
};

/// Random Noise Defense: every query x is answered with f(x + nu * v),
/// v ~ N(0, I) fresh from the defender's stream.
struct DefensePolicy {
    DefensePolicy(double nu, RngStream rng);
    double nu;
    RngStream rng;
};

struct QueryRecord {
    std::size_t index;  // ledger count after this query (1-based)
    double value;
};

class QueryLedger {
public:
    explicit QueryLedger(std::size_t budget, bool keep_history = false);

    std::size_t count() const { return count_; }
    std::size_t budget() const { return budget_; }
    std::size_t remaining() const { return budget_ - count_; }
    bool exhausted() const { return count_ >= budget_; }

    /// Reserve n queries up front; throws BudgetExhausted (leaving the ledger
    /// untouched) if fewer than n remain.
    void reserve(std::size_t n) const;
    void record(double value);

    bool keeps_history() const { return keep_history_; }
    const std::vector<QueryRecord>& history() const { return history_; }

private:
    std::size_t budget_;
    std::size_t count_ = 0;
    bool keep_history_;
    std::vector<QueryRecord> history_;
};

/// The black-box boundary handed to attacks. It exposes noisy answers and the
/// query count, and nothing else: no noise scale, no defender stream, no
/// access to the noiseless objective.
class DefendedOracle {
public:
    DefendedOracle(const Objective& objective, DefensePolicy defense, QueryLedger ledger);

    std::size_t dim() const { return objective_->dim(); }

    /// One defended query; costs 1.
    double query(std::span<const double> x);
    double query(const Vector& x) { return query(x.span()); }
    /// Mean of m independent defended queries; costs m, all-or-nothing.
    double eot_query(std::span<const double> x, std::size_t m);
    double eot_query(const Vector& x, std::size_t m) { return eot_query(x.span(), m); }
    /// True iff a fresh defended query at x is negative; costs 1.
    bool observed_success(const Vector& x) { return query(x) < 0.0; }

    std::size_t queries_used() const { return ledger_.count(); }
    std::size_t remaining() const { return ledger_.remaining(); }
    const QueryLedger& ledger() const { return ledger_; }

private:
    double noisy_value(std::span<const double> x);

    const Objective* objective_;
    DefensePolicy defense_;
    QueryLedger ledger_;
    std::vector<double> scratch_;
};

/// CSV "query_index,value", one line per recorded query.
void write_query_log(std::ostream& out, const QueryLedger& ledger);
void save_query_log(const QueryLedger& ledger, const std::filesystem::path& path);

}  // namespace bbarena::oracle

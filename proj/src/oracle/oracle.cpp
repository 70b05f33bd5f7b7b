#include "bbarena/oracle/oracle.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>

#include "bbarena/numkit/error.hpp"
#include "bbarena/numkit/kernels.hpp"

namespace bbarena::oracle {

OutputSpace parse_output_space(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "logit") return OutputSpace::Logit;
    if (lower == "softmax") return OutputSpace::Softmax;
    throw ContractViolation("unknown output space '" + std::string(text) + "'");
}

MarginOracle::MarginOracle(const netmod::MlpModel& model, std::size_t true_label, OutputSpace space,
                           std::optional<std::size_t> target_label)
    : model_(&model), true_label_(true_label), space_(space), target_label_(target_label) {
    require(model.num_classes() >= 2, "MarginOracle: model needs at least two classes");
    require(true_label < model.num_classes(), "MarginOracle: true label out of range");
    require(!target_label || *target_label < model.num_classes(),
            "MarginOracle: target label out of range");
}

double MarginOracle::margin_from_scores(std::span<const double> scores, std::size_t true_label,
                                        std::optional<std::size_t> target_label) {
    const std::size_t anchor = target_label ? *target_label : true_label;
    double best_other = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < scores.size(); ++j)
        if (j != anchor) best_other = std::max(best_other, scores[j]);
    return target_label ? best_other - scores[anchor] : scores[anchor] - best_other;
}

double MarginOracle::value(std::span<const double> x) const {
    std::vector<double> scores = model_->forward(x);
    if (space_ == OutputSpace::Softmax) {
        const double peak = *std::max_element(scores.begin(), scores.end());
        double total = 0.0;
        for (double& s : scores) total += (s = std::exp(s - peak));
        for (double& s : scores) s /= total;
    }
    return margin_from_scores(scores, true_label_, target_label_);
}

DefensePolicy::DefensePolicy(double nu_, RngStream rng_) : nu(nu_), rng(rng_) {
    require(nu >= 0.0 && std::isfinite(nu), "DefensePolicy: nu must be nonnegative");
}

QueryLedger::QueryLedger(std::size_t budget, bool keep_history)
    : budget_(budget), keep_history_(keep_history) {
    require(budget >= 1, "QueryLedger: budget must be positive");
}

void QueryLedger::reserve(std::size_t n) const {
    if (n > remaining())
        throw BudgetExhausted("query budget exhausted: " + std::to_string(count_) + " of " +
                              std::to_string(budget_) + " used, " + std::to_string(n) +
                              " requested");
}

void QueryLedger::record(double value) {
    reserve(1);
    ++count_;
    if (keep_history_) history_.push_back({count_, value});
}

DefendedOracle::DefendedOracle(const Objective& objective, DefensePolicy defense, QueryLedger ledger)
    : objective_(&objective), defense_(std::move(defense)), ledger_(std::move(ledger)) {}

double DefendedOracle::noisy_value(std::span<const double> x) {
    require(x.size() == objective_->dim(), "DefendedOracle: query dimension mismatch");
    if (defense_.nu == 0.0) return objective_->value(x);
    scratch_.resize(x.size());
    defense_.rng.fill_normal(scratch_);
    kernels::active().add_scaled(x.data(), defense_.nu, scratch_.data(), scratch_.data(), x.size());
    return objective_->value(scratch_);
}

double DefendedOracle::query(std::span<const double> x) {
    ledger_.reserve(1);
    const double v = noisy_value(x);
    ledger_.record(v);
    return v;
}

double DefendedOracle::eot_query(std::span<const double> x, std::size_t m) {
    require(m >= 1, "eot_query: M must be at least 1");
    ledger_.reserve(m);
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double v = noisy_value(x);
        ledger_.record(v);
        total += v;
    }
    return total / static_cast<double>(m);
}

void write_query_log(std::ostream& out, const QueryLedger& ledger) {
    out << "query_index,value\n";
    char buf[64];
    for (const QueryRecord& r : ledger.history()) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", r.index, r.value);
        out << buf;
    }
}

void save_query_log(const QueryLedger& ledger, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    write_query_log(out, ledger);
}

}  // namespace bbarena::oracle

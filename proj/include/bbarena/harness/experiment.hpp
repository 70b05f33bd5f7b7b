#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bbarena/attacks/attacks.hpp"
#include "bbarena/netmod/model.hpp"
#include "bbarena/oracle/oracle.hpp"

namespace bbarena::harness {

enum class BudgetMode {
    Fixed,     // every run gets `budget` queries regardless of M
    Adaptive,  // every run gets budget * M queries
};

BudgetMode parse_budget_mode(std::string_view text);
std::string_view to_string(BudgetMode mode);

struct ExperimentSpec {
    std::filesystem::path model_path;
    std::filesystem::path dataset_path;
    std::size_t sample_count = 200;
    NormKind norm = NormKind::LINF;
    double radius = 0.05;
    std::vector<attacks::AttackKind> attacks;
    std::vector<double> mu_grid;
    /// Absolute noise levels. Exactly one of nu_grid / nu_ratio_grid is used.
    std::vector<double> nu_grid;
    /// Noise levels relative to the probe scale: nu = ratio * mu.
    std::vector<double> nu_ratio_grid;
    std::vector<std::size_t> m_grid{1};
    std::size_t budget = 10000;
    BudgetMode budget_mode = BudgetMode::Fixed;
    std::vector<std::uint64_t> seeds{0};
    /// Noise used for the clean-accuracy column; the cell's nu when unset.
    std::optional<double> defense_eval_sigma;
    oracle::OutputSpace output_space = oracle::OutputSpace::Logit;

    // Attack hyperparameters shared by every cell.
    double eta = 0.01;
    std::map<attacks::AttackKind, double> eta_by_attack;
    std::size_t samples_per_step = 10;
    attacks::GradientEstimator estimator = attacks::GradientEstimator::Antithetic;
    attacks::BaselineMode baseline = attacks::BaselineMode::Cached;

    /// When set, one JSON-lines trace per run is written here.
    std::optional<std::filesystem::path> trace_dir;
    /// With trace_dir set, also write the per-run query log CSV.
    bool query_logs = false;

    void validate() const;
    double eta_for(attacks::AttackKind kind) const;
    /// The (nu) values paired with a given mu.
    std::vector<double> nu_values(double mu) const;
    std::size_t run_budget(std::size_t m) const;
};

/// Line-oriented `key = value` config with [data], [model], [defense],
/// [attack] and [sweep] sections, comma-separated lists and # comments.
/// Relative paths resolve against `base_dir`.
ExperimentSpec parse_spec(std::istream& in, const std::filesystem::path& base_dir = {});
ExperimentSpec load_spec(const std::filesystem::path& path);

struct ReportRow {
    attacks::AttackKind attack = attacks::AttackKind::Nes;
    NormKind norm = NormKind::LINF;
    double mu = 0.0;
    double nu = 0.0;
    std::size_t eot_m = 1;
    std::size_t budget = 0;
    double failure_rate = 0.0;
    double true_failure_rate = 0.0;
    /// Query statistics over attacker-observed successes; absent (empty CSV
    /// fields) when no run succeeded.
    std::optional<double> mean_queries;
    std::optional<double> median_queries;
    double clean_acc = 0.0;
    std::size_t n_samples = 0;
    std::size_t n_seeds = 0;

    bool operator==(const ReportRow&) const = default;
};

/// Orders rows by attack, norm, mu, nu, M.
bool row_less(const ReportRow& a, const ReportRow& b);

inline constexpr const char* kCsvHeader =
    "attack,norm,mu,nu,M,budget,failure_rate,true_failure_rate,mean_q,median_q,clean_acc,n_samples,"
    "n_seeds";

void write_csv(std::ostream& out, const std::vector<ReportRow>& rows);
/// Throws ContractViolation on empty rows (and creates no file).
void write_csv(const std::vector<ReportRow>& rows, const std::filesystem::path& path);
std::vector<ReportRow> parse_csv(std::istream& in);
std::vector<ReportRow> load_csv(const std::filesystem::path& path);
/// Fixed-width table sorted by (attack, nu/mu), with a footer on how clean
/// accuracy under the defense is measured.
std::string summarize(std::vector<ReportRow> rows);

struct RunRecord {
    std::size_t cell = 0;  // index into ExperimentResult::rows before sorting
    std::size_t sample = 0;
    std::uint64_t seed = 0;
    bool success = false;
    bool true_success = false;
    std::size_t ledger_queries = 0;
    std::size_t budget = 0;
    // Trace digest.
    std::size_t trace_queries = 0;
    std::size_t trace_records = 0;
    bool trace_monotone = true;
};

struct ExperimentResult {
    std::vector<ReportRow> rows;  // sorted by row_less
    std::vector<RunRecord> runs;  // cell refers to the sorted rows
};

/// Runs every (attack, mu, nu, M) cell over every (pool sample, seed).
/// Deterministic given the spec; BBARENA_THREADS caps the worker count.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Same on in-memory inputs (model_path/dataset_path are ignored).
ExperimentResult run_experiment(const ExperimentSpec& spec, const netmod::MlpModel& model,
                                const netmod::Dataset& data);

/// Fills in true_success and final_true_margin from the defender-side objective.
void score_outcome(attacks::AttackOutcome& outcome, const oracle::MarginOracle& truth);

/// Failure rates of each trace-file group under `dir`, keyed by the file name
/// prefix before "_s<seed>_i<sample>.jsonl". Used to audit CSV aggregation.
std::map<std::string, double> failure_rates_from_traces(const std::filesystem::path& dir);
/// The prefix run_experiment uses for a row's trace files.
std::string trace_prefix(const ReportRow& row);

/// Worker count: BBARENA_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

}  // namespace bbarena::harness

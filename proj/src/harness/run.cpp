#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "bbarena/harness/experiment.hpp"
#include "bbarena/netmod/io.hpp"
#include "bbarena/netmod/train.hpp"
#include "bbarena/numkit/error.hpp"

namespace bbarena::harness {

namespace {

struct Cell {
    attacks::AttackKind attack;
    double mu;
    double nu;
    std::size_t m;
};

std::string cell_name(const Cell& c) {
    std::ostringstream out;
    out << attacks::to_string(c.attack) << " mu=" << c.mu << " nu=" << c.nu << " M=" << c.m;
    return out.str();
}

std::string run_file(const ReportRow& row, std::uint64_t seed, std::size_t sample,
                     const char* suffix) {
    return trace_prefix(row) + "_s" + std::to_string(seed) + "_i" + std::to_string(sample) + suffix;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Runs fn(i) for i in [0, n) on up to `workers` threads; the first exception
// is rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn fn) {
    workers = std::max<std::size_t>(1, std::min(workers, n));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (std::size_t i; !failed && (i = next.fetch_add(1)) < n;) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace

std::size_t worker_count() {
    if (const char* env = std::getenv("BBARENA_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::string trace_prefix(const ReportRow& row) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s_%s_mu%.6g_nu%.6g_M%zu",
                  std::string(attacks::to_string(row.attack)).c_str(),
                  std::string(to_string(row.norm)).c_str(), row.mu, row.nu, row.eot_m);
    return buf;
}

void score_outcome(attacks::AttackOutcome& outcome, const oracle::MarginOracle& truth) {
    outcome.final_true_margin = truth.margin(outcome.x_adv);
    outcome.true_success = outcome.final_true_margin < 0.0;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    const netmod::MlpModel model = netmod::load_model(spec.model_path);
    const netmod::Dataset data = netmod::load_dataset_csv(spec.dataset_path, model.num_classes());
    return run_experiment(spec, model, data);
}

ExperimentResult run_experiment(const ExperimentSpec& spec, const netmod::MlpModel& model,
                                const netmod::Dataset& data) {
    spec.validate();
    require(spec.sample_count <= data.size(), "run_experiment: sample_count " +
                                                  std::to_string(spec.sample_count) +
                                                  " exceeds dataset size " + std::to_string(data.size()));
    require(data.dim() == model.input_dim(), "run_experiment: dataset and model dimensions differ");

    // Evaluation subset and attack pool, both fixed by the first seed.
    RngStream pick(spec.seeds.front(), RngStream::stream_key({0x5A3Eull}));
    std::vector<std::size_t> subset = netmod::shuffled_indices(data.size(), pick);
    subset.resize(spec.sample_count);
    const netmod::Dataset eval = data.subset(subset, data.name() + "_eval");
    std::vector<std::size_t> pool;
    for (std::size_t i = 0; i < eval.size(); ++i)
        if (netmod::predict(model, eval.input(i).span()) == eval.label(i)) pool.push_back(i);
    require(!pool.empty(), "run_experiment: no correctly classified sample in the evaluation subset");

    std::vector<Cell> cells;
    for (attacks::AttackKind kind : spec.attacks)
        for (double mu : spec.mu_grid)
            for (double nu : spec.nu_values(mu))
                for (std::size_t m : spec.m_grid) cells.push_back({kind, mu, nu, m});

    ExperimentResult result;
    for (const Cell& c : cells) {
        ReportRow row;
        row.attack = c.attack;
        row.norm = spec.norm;
        row.mu = c.mu;
        row.nu = c.nu;
        row.eot_m = c.m;
        row.budget = spec.run_budget(c.m);
        row.n_samples = pool.size();
        row.n_seeds = spec.seeds.size();
        const double sigma = spec.defense_eval_sigma.value_or(c.nu);
        RngStream acc_rng(spec.seeds.front(),
                          RngStream::stream_key({0xC1EAull, std::bit_cast<std::uint64_t>(sigma)}));
        row.clean_acc = netmod::accuracy(model, eval, sigma, acc_rng);
        result.rows.push_back(row);
    }

    if (spec.trace_dir) std::filesystem::create_directories(*spec.trace_dir);

    const std::size_t per_cell = pool.size() * spec.seeds.size();
    std::vector<RunRecord> runs(cells.size() * per_cell);
    parallel_for(runs.size(), worker_count(), [&](std::size_t task) {
        const std::size_t ci = task / per_cell;
        const std::size_t sample = pool[(task % per_cell) / spec.seeds.size()];
        const std::uint64_t seed = spec.seeds[task % spec.seeds.size()];
        const Cell& cell = cells[ci];
        try {
            const Vector& x0 = eval.input(sample);
            const oracle::MarginOracle truth(model, eval.label(sample), spec.output_space);
            const std::size_t budget = spec.run_budget(cell.m);
            const bool log_queries = spec.trace_dir && spec.query_logs;
            oracle::DefendedOracle oracle(
                truth,
                oracle::DefensePolicy(cell.nu, RngStream(seed, RngStream::stream_key({0xDEFEull, sample}))),
                oracle::QueryLedger(budget, log_queries));

            attacks::AttackConfig cfg;
            cfg.norm = spec.norm;
            cfg.radius = spec.radius;
            cfg.mu = cell.mu;
            cfg.eta = spec.eta_for(cell.attack);
            cfg.max_queries = budget;
            cfg.samples_per_step = spec.samples_per_step;
            cfg.eot_m = cell.m;
            cfg.seed = RngStream::stream_key({seed, sample});
            cfg.estimator = spec.estimator;
            cfg.baseline = spec.baseline;

            attacks::AttackTrace trace;
            attacks::AttackOutcome outcome = attacks::run_attack(cell.attack, oracle, x0, cfg, &trace);
            score_outcome(outcome, truth);

            RunRecord& rec = runs[task];
            rec.cell = ci;
            rec.sample = sample;
            rec.seed = seed;
            rec.success = outcome.success;
            rec.true_success = outcome.true_success;
            rec.ledger_queries = oracle.queries_used();
            rec.budget = budget;
            rec.trace_queries = trace.queries_used;
            rec.trace_records = trace.records.size();
            std::size_t last = 0;
            for (const auto& r : trace.records) {
                rec.trace_monotone = rec.trace_monotone && r.queries_used >= last;
                last = r.queries_used;
            }
            rec.trace_monotone = rec.trace_monotone && last <= trace.queries_used;

            if (spec.trace_dir) {
                const ReportRow& row = result.rows[ci];
                std::ofstream out(*spec.trace_dir / run_file(row, seed, sample, ".jsonl"));
                if (!out) throw std::runtime_error("cannot write trace in " + spec.trace_dir->string());
                trace.write_jsonl(out);
                if (log_queries)
                    oracle::save_query_log(oracle.ledger(),
                                           *spec.trace_dir / run_file(row, seed, sample, ".queries.csv"));
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("cell [" + cell_name(cell) + "] sample " + std::to_string(sample) +
                                     " seed " + std::to_string(seed) + ": " + e.what());
        }
    });

    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        ReportRow& row = result.rows[ci];
        std::size_t failures = 0, true_failures = 0;
        std::vector<double> queries;
        for (std::size_t k = 0; k < per_cell; ++k) {
            const RunRecord& rec = runs[ci * per_cell + k];
            if (rec.success) queries.push_back(static_cast<double>(rec.ledger_queries));
            else ++failures;
            if (!rec.true_success) ++true_failures;
        }
        row.failure_rate = static_cast<double>(failures) / static_cast<double>(per_cell);
        row.true_failure_rate = static_cast<double>(true_failures) / static_cast<double>(per_cell);
        if (!queries.empty()) {
            double total = 0.0;
            for (double q : queries) total += q;
            row.mean_queries = total / static_cast<double>(queries.size());
            row.median_queries = median_of(queries);
        }
    }

    // Sort rows and remap run cells to the sorted order.
    std::vector<std::size_t> order(cells.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return row_less(result.rows[a], result.rows[b]);
    });
    std::vector<std::size_t> rank(order.size());
    std::vector<ReportRow> sorted;
    for (std::size_t i = 0; i < order.size(); ++i) {
        rank[order[i]] = i;
        sorted.push_back(result.rows[order[i]]);
    }
    result.rows = std::move(sorted);
    for (RunRecord& rec : runs) rec.cell = rank[rec.cell];
    result.runs = std::move(runs);
    return result;
}

std::map<std::string, double> failure_rates_from_traces(const std::filesystem::path& dir) {
    std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // failures, runs
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (entry.path().extension() != ".jsonl") continue;
        const auto cut = name.rfind("_s");
        if (cut == std::string::npos) continue;
        std::ifstream in(entry.path());
        const attacks::AttackTrace trace = attacks::AttackTrace::read_jsonl(in);
        require(trace.finished, "trace '" + name + "' has no terminal summary");
        auto& c = counts[name.substr(0, cut)];
        c.first += trace.success ? 0 : 1;
        c.second += 1;
    }
    std::map<std::string, double> out;
    for (const auto& [prefix, c] : counts)
        out[prefix] = static_cast<double>(c.first) / static_cast<double>(c.second);
    return out;
}

}  // namespace bbarena::harness

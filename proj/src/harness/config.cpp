#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "bbarena/harness/experiment.hpp"
#include "bbarena/numkit/error.hpp"

namespace bbarena::harness {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

class LineError {
public:
    LineError(std::size_t line, std::string key) : line_(line), key_(std::move(key)) {}
    [[noreturn]] void fail(const std::string& why) const {
        throw ContractViolation("config line " + std::to_string(line_) + " (" + key_ + "): " + why);
    }

    double real(const std::string& text) const {
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
            fail("expected a number, got '" + text + "'");
        return v;
    }
    std::uint64_t integer(const std::string& text) const {
        std::uint64_t v = 0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc() || ptr != text.data() + text.size())
            fail("expected a nonnegative integer, got '" + text + "'");
        return v;
    }
    bool boolean(const std::string& text) const {
        const std::string t = lower(text);
        if (t == "true" || t == "yes" || t == "1") return true;
        if (t == "false" || t == "no" || t == "0") return false;
        fail("expected true or false, got '" + text + "'");
    }
    std::vector<double> reals(const std::string& text) const {
        std::vector<double> out;
        for (const auto& item : split_list(text)) out.push_back(real(item));
        if (out.empty()) fail("empty list");
        return out;
    }
    std::vector<std::uint64_t> integers(const std::string& text) const {
        std::vector<std::uint64_t> out;
        for (const auto& item : split_list(text)) out.push_back(integer(item));
        if (out.empty()) fail("empty list");
        return out;
    }

private:
    std::size_t line_;
    std::string key_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
    const std::filesystem::path p(value);
    return p.is_absolute() || base.empty() ? p : base / p;
}

}  // namespace

BudgetMode parse_budget_mode(std::string_view text) {
    const std::string t = lower(std::string(text));
    if (t == "fixed") return BudgetMode::Fixed;
    if (t == "adaptive") return BudgetMode::Adaptive;
    throw ContractViolation("unknown budget mode '" + std::string(text) + "'");
}

std::string_view to_string(BudgetMode mode) {
    return mode == BudgetMode::Fixed ? "FIXED" : "ADAPTIVE";
}

ExperimentSpec parse_spec(std::istream& in, const std::filesystem::path& base_dir) {
    static const std::set<std::string> kSections{"data", "model", "defense", "attack", "sweep"};
    ExperimentSpec spec;
    spec.seeds.clear();
    std::string section;
    std::set<std::string> seen;
    std::string raw;
    std::size_t line_no = 0;

    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(std::string_view(raw).substr(0, raw.find('#')));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ContractViolation("config line " + std::to_string(line_no) + ": malformed section header");
            section = lower(trim(std::string_view(line).substr(1, line.size() - 2)));
            if (!kSections.count(section))
                throw ContractViolation("config line " + std::to_string(line_no) + ": unknown section [" +
                                        section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ContractViolation("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = lower(trim(std::string_view(line).substr(0, eq)));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        const LineError at(line_no, section + "." + key);
        if (section.empty()) at.fail("key outside of any section");
        if (!seen.insert(section + "." + key).second) at.fail("duplicate key");
        if (value.empty()) at.fail("empty value");

        try {
            if (section == "data") {
                if (key == "dataset") spec.dataset_path = resolve(base_dir, value);
                else if (key == "sample_count") spec.sample_count = at.integer(value);
                else at.fail("unknown key");
            } else if (section == "model") {
                if (key == "path") spec.model_path = resolve(base_dir, value);
                else if (key == "output_space") spec.output_space = oracle::parse_output_space(value);
                else at.fail("unknown key");
            } else if (section == "defense") {
                if (key == "nu") spec.nu_grid = at.reals(value);
                else if (key == "nu_ratio") spec.nu_ratio_grid = at.reals(value);
                else if (key == "eval_sigma") spec.defense_eval_sigma = at.real(value);
                else at.fail("unknown key");
            } else if (section == "attack") {
                if (key == "attacks") {
                    for (const auto& name : split_list(value))
                        spec.attacks.push_back(attacks::parse_attack_kind(name));
                } else if (key == "norm") {
                    spec.norm = parse_norm_kind(value);
                } else if (key == "radius") {
                    spec.radius = at.real(value);
                } else if (key == "mu") {
                    spec.mu_grid = at.reals(value);
                } else if (key == "eta") {
                    spec.eta = at.real(value);
                } else if (key.rfind("eta_", 0) == 0) {
                    spec.eta_by_attack[attacks::parse_attack_kind(key.substr(4))] = at.real(value);
                } else if (key == "samples_per_step") {
                    spec.samples_per_step = at.integer(value);
                } else if (key == "estimator") {
                    const std::string v = lower(value);
                    if (v == "antithetic") spec.estimator = attacks::GradientEstimator::Antithetic;
                    else if (v == "one_sided") spec.estimator = attacks::GradientEstimator::OneSided;
                    else at.fail("expected antithetic or one_sided");
                } else if (key == "baseline") {
                    const std::string v = lower(value);
                    if (v == "cached") spec.baseline = attacks::BaselineMode::Cached;
                    else if (v == "paired") spec.baseline = attacks::BaselineMode::Paired;
                    else at.fail("expected cached or paired");
                } else {
                    at.fail("unknown key");
                }
            } else if (section == "sweep") {
                if (key == "m") {
                    spec.m_grid.clear();
                    for (auto m : at.integers(value)) spec.m_grid.push_back(m);
                } else if (key == "budget") {
                    spec.budget = at.integer(value);
                } else if (key == "budget_mode") {
                    spec.budget_mode = parse_budget_mode(value);
                } else if (key == "seeds") {
                    spec.seeds = at.integers(value);
                } else if (key == "trace_dir") {
                    spec.trace_dir = resolve(base_dir, value);
                } else if (key == "query_logs") {
                    spec.query_logs = at.boolean(value);
                } else {
                    at.fail("unknown key");
                }
            }
        } catch (const ContractViolation& e) {
            const std::string what = e.what();
            if (what.rfind("config line", 0) == 0) throw;
            at.fail(what);
        }
    }
    if (spec.seeds.empty()) spec.seeds.push_back(0);
    spec.validate();
    return spec;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path.string() + "': file not found");
    ExperimentSpec spec = parse_spec(in, path.parent_path());
    if (spec.model_path.empty()) throw ContractViolation("config: [model] path is required");
    if (spec.dataset_path.empty()) throw ContractViolation("config: [data] dataset is required");
    return spec;
}

void ExperimentSpec::validate() const {
    require(sample_count >= 1, "ExperimentSpec: sample_count must be positive");
    require(radius > 0.0, "ExperimentSpec: radius must be positive");
    require(!attacks.empty(), "ExperimentSpec: attack list must be nonempty");
    require(!mu_grid.empty(), "ExperimentSpec: mu grid must be nonempty");
    for (double mu : mu_grid) require(mu > 0.0, "ExperimentSpec: mu values must be positive");
    require(nu_grid.empty() != nu_ratio_grid.empty(),
            "ExperimentSpec: give exactly one of nu and nu_ratio");
    for (double nu : nu_grid) require(nu >= 0.0, "ExperimentSpec: nu values must be nonnegative");
    for (double a : nu_ratio_grid) require(a >= 0.0, "ExperimentSpec: nu ratios must be nonnegative");
    require(!m_grid.empty(), "ExperimentSpec: M grid must be nonempty");
    for (std::size_t m : m_grid) require(m >= 1, "ExperimentSpec: M values must be at least 1");
    require(budget >= 2, "ExperimentSpec: budget must be at least 2");
    require(!seeds.empty(), "ExperimentSpec: at least one seed required");
    require(!defense_eval_sigma || *defense_eval_sigma >= 0.0,
            "ExperimentSpec: eval_sigma must be nonnegative");
    require(samples_per_step >= 1, "ExperimentSpec: samples_per_step must be positive");
    require(eta > 0.0, "ExperimentSpec: eta must be positive");
    for (const auto& [kind, value] : eta_by_attack)
        require(value > 0.0, "ExperimentSpec: eta values must be positive");
    for (attacks::AttackKind kind : attacks) {
        if (kind == attacks::AttackKind::Simba)
            require(norm == NormKind::L2, "ExperimentSpec: SIMBA requires norm = L2");
        if (kind == attacks::AttackKind::Square)
            require(norm == NormKind::LINF, "ExperimentSpec: SQUARE requires norm = LINF");
    }
}

double ExperimentSpec::eta_for(attacks::AttackKind kind) const {
    const auto it = eta_by_attack.find(kind);
    return it == eta_by_attack.end() ? eta : it->second;
}

std::vector<double> ExperimentSpec::nu_values(double mu) const {
    if (!nu_grid.empty()) return nu_grid;
    std::vector<double> out;
    for (double a : nu_ratio_grid) out.push_back(a * mu);
    return out;
}

std::size_t ExperimentSpec::run_budget(std::size_t m) const {
    return budget_mode == BudgetMode::Adaptive ? budget * m : budget;
}

}  // namespace bbarena::harness

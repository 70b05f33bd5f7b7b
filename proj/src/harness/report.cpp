#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

#include "bbarena/harness/experiment.hpp"
#include "bbarena/numkit/error.hpp"

namespace bbarena::harness {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return fields;
}

double parse_real(const std::string& s, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ContractViolation("csv line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

std::size_t parse_count(const std::string& s, std::size_t line) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ContractViolation("csv line " + std::to_string(line) + ": bad integer '" + s + "'");
    return v;
}

double noise_ratio(const ReportRow& r) { return r.nu / r.mu; }

}  // namespace

bool row_less(const ReportRow& a, const ReportRow& b) {
    return std::tuple(static_cast<int>(a.attack), static_cast<int>(a.norm), a.mu, a.nu, a.eot_m) <
           std::tuple(static_cast<int>(b.attack), static_cast<int>(b.norm), b.mu, b.nu, b.eot_m);
}

void write_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
    out << kCsvHeader << '\n';
    for (const ReportRow& r : rows) {
        out << attacks::to_string(r.attack) << ',' << to_string(r.norm) << ',' << fmt(r.mu) << ','
            << fmt(r.nu) << ',' << r.eot_m << ',' << r.budget << ',' << fmt(r.failure_rate) << ','
            << fmt(r.true_failure_rate) << ',' << (r.mean_queries ? fmt(*r.mean_queries) : "") << ','
            << (r.median_queries ? fmt(*r.median_queries) : "") << ',' << fmt(r.clean_acc) << ','
            << r.n_samples << ',' << r.n_seeds << '\n';
    }
}

void write_csv(const std::vector<ReportRow>& rows, const std::filesystem::path& path) {
    require(!rows.empty(), "write_csv: no rows to write");
    std::ostringstream buffer;
    write_csv(buffer, rows);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_csv: cannot open '" + path.string() + "' for writing");
    out << buffer.str();
    if (!out) throw std::runtime_error("write_csv: failed writing '" + path.string() + "'");
}

std::vector<ReportRow> parse_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw ContractViolation("csv: missing or unexpected header");
    std::vector<ReportRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != 13)
            throw ContractViolation("csv line " + std::to_string(line_no) + ": expected 13 fields");
        ReportRow r;
        r.attack = attacks::parse_attack_kind(f[0]);
        r.norm = parse_norm_kind(f[1]);
        r.mu = parse_real(f[2], line_no);
        r.nu = parse_real(f[3], line_no);
        r.eot_m = parse_count(f[4], line_no);
        r.budget = parse_count(f[5], line_no);
        r.failure_rate = parse_real(f[6], line_no);
        r.true_failure_rate = parse_real(f[7], line_no);
        if (!f[8].empty()) r.mean_queries = parse_real(f[8], line_no);
        if (!f[9].empty()) r.median_queries = parse_real(f[9], line_no);
        r.clean_acc = parse_real(f[10], line_no);
        r.n_samples = parse_count(f[11], line_no);
        r.n_seeds = parse_count(f[12], line_no);
        rows.push_back(r);
    }
    return rows;
}

std::vector<ReportRow> load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "': file not found");
    return parse_csv(in);
}

std::string summarize(std::vector<ReportRow> rows) {
    require(!rows.empty(), "summarize: no rows");
    std::stable_sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
        return std::tuple(static_cast<int>(a.attack), noise_ratio(a), a.mu, a.eot_m) <
               std::tuple(static_cast<int>(b.attack), noise_ratio(b), b.mu, b.eot_m);
    });
    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-11s %-5s %9s %9s %7s %4s %7s %8s %8s %9s %9s %9s\n", "attack",
                  "norm", "mu", "nu", "nu/mu", "M", "budget", "fail", "fail*", "mean_q", "median_q",
                  "clean_acc");
    out << buf;
    bool missing_stats = false;
    for (const ReportRow& r : rows) {
        const std::string mean = r.mean_queries ? fmt(*r.mean_queries) : "-";
        const std::string median = r.median_queries ? fmt(*r.median_queries) : "-";
        missing_stats = missing_stats || !r.mean_queries;
        std::snprintf(buf, sizeof buf, "%-11s %-5s %9.4g %9.4g %7.3g %4zu %7zu %8.4f %8.4f %9s %9s %9.4f\n",
                      std::string(attacks::to_string(r.attack)).c_str(),
                      std::string(to_string(r.norm)).c_str(), r.mu, r.nu, noise_ratio(r), r.eot_m,
                      r.budget, r.failure_rate, r.true_failure_rate, mean.c_str(), median.c_str(),
                      r.clean_acc);
        out << buf;
    }
    out << "\nfail = attacker-observed failure rate, fail* = failure judged on the noiseless margin.\n"
           "Query statistics cover successful runs only.";
    if (missing_stats) out << " '-' marks cells with no successful run.";
    out << "\nclean_acc under the defense uses one noise draw per image.\n";
    return out.str();
}

}  // namespace bbarena::harness

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "bbarena/attacks/attacks.hpp"
#include "bbarena/numkit/error.hpp"

namespace bbarena::attacks {

std::string_view to_string(AttackKind kind) {
    switch (kind) {
        case AttackKind::Nes: return "NES";
        case AttackKind::ZoSign: return "ZOSIGN";
        case AttackKind::Simba: return "SIMBA";
        case AttackKind::Square: return "SQUARE";
        case AttackKind::SignHunter: return "SIGNHUNTER";
    }
    return "?";
}

AttackKind parse_attack_kind(std::string_view text) {
    std::string upper(text);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (upper == "NES") return AttackKind::Nes;
    if (upper == "ZOSIGN" || upper == "ZS" || upper == "ZOSIGNSGD") return AttackKind::ZoSign;
    if (upper == "SIMBA") return AttackKind::Simba;
    if (upper == "SQUARE") return AttackKind::Square;
    if (upper == "SIGNHUNTER" || upper == "SIGN") return AttackKind::SignHunter;
    throw ContractViolation("unknown attack '" + std::string(text) + "'");
}

std::vector<SquareScheduleStep> default_square_schedule() {
    return {{0.02, 0.5}, {0.10, 0.25}, {0.25, 0.125}, {0.50, 0.0625}};
}

void AttackConfig::validate() const {
    require(mu > 0.0 && std::isfinite(mu), "AttackConfig: mu must be positive");
    require(radius > 0.0 && std::isfinite(radius), "AttackConfig: radius must be positive");
    require(eta > 0.0 && std::isfinite(eta), "AttackConfig: eta must be positive");
    require(max_queries >= 2, "AttackConfig: max_queries must be at least 2");
    require(samples_per_step >= 1, "AttackConfig: samples_per_step must be at least 1");
    require(eot_m >= 1, "AttackConfig: eot_m must be at least 1");
    double last_fraction = 0.0;
    double last_factor = 1.0;
    for (const SquareScheduleStep& step : square_schedule) {
        require(step.budget_fraction > last_fraction && step.budget_fraction <= 1.0,
                "AttackConfig: square schedule budget fractions must increase within (0, 1]");
        require(step.mu_factor > 0.0 && step.mu_factor < last_factor,
                "AttackConfig: square schedule side fractions must decrease");
        last_fraction = step.budget_fraction;
        last_factor = step.mu_factor;
    }
}

RngStream attacker_stream(AttackKind kind, std::uint64_t seed) {
    return RngStream(seed, RngStream::stream_key({0xA77Aull, static_cast<std::uint64_t>(kind)}));
}

AttackOutcome run_attack(AttackKind kind, oracle::DefendedOracle& oracle, const Vector& x0,
                         const AttackConfig& cfg, AttackTrace* trace) {
    switch (kind) {
        case AttackKind::Nes: return nes_attack(oracle, x0, cfg, trace);
        case AttackKind::ZoSign: return zo_signsgd_attack(oracle, x0, cfg, trace);
        case AttackKind::Simba: return simba_attack(oracle, x0, cfg, trace);
        case AttackKind::Square: return square_attack(oracle, x0, cfg, trace);
        case AttackKind::SignHunter: return signhunter_attack(oracle, x0, cfg, trace);
    }
    throw ContractViolation("run_attack: unknown attack kind");
}

void AttackTrace::write_jsonl(std::ostream& out) const {
    for (const TraceRecord& r : records) {
        nlohmann::ordered_json j;
        j["iteration"] = r.iteration;
        j["queries_used"] = r.queries_used;
        j["observed_loss"] = r.observed_loss;
        out << j.dump() << '\n';
    }
    if (finished) {
        nlohmann::ordered_json j;
        j["final"] = true;
        j["success"] = success;
        j["queries_used"] = queries_used;
        j["iterations"] = iterations;
        out << j.dump() << '\n';
    }
}

AttackTrace AttackTrace::read_jsonl(std::istream& in) {
    AttackTrace trace;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const nlohmann::json j = nlohmann::json::parse(line);
        if (j.value("final", false)) {
            trace.finished = true;
            trace.success = j.at("success").get<bool>();
            trace.queries_used = j.at("queries_used").get<std::size_t>();
            trace.iterations = j.at("iterations").get<std::size_t>();
        } else {
            trace.records.push_back({j.at("iteration").get<std::size_t>(),
                                     j.at("queries_used").get<std::size_t>(),
                                     j.at("observed_loss").get<double>()});
        }
    }
    return trace;
}

}  // namespace bbarena::attacks

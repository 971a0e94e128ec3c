#include "smclab/report.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "smclab/errors.hpp"

namespace smclab {

const ReportRow& ExperimentReport::row(const std::string& quantity) const {
    for (const auto& r : rows)
        if (r.quantity == quantity) return r;
    throw InvalidArgument("report has no quantity '" + quantity + "'");
}

void ExperimentReport::add(const std::string& quantity, const EstimateWithCI& e, std::size_t particles,
                           std::uint64_t seed) {
    rows.push_back({experiment, quantity, e.point, e.lo, e.hi, e.n, particles, seed, 0.0});
}

void ExperimentReport::set_wall_time(double seconds) {
    for (auto& r : rows) r.wall_time_s = seconds;
}

std::vector<Verdict> ExperimentReport::verdicts() const {
    std::vector<Verdict> out;
    for (const auto& c : checks) out.push_back(evaluate(c, rows));
    return out;
}

bool ExperimentReport::passed() const {
    for (const auto& v : verdicts())
        if (!v.pass) return false;
    return true;
}

std::string to_string(VerdictRule r) {
    switch (r) {
        case VerdictRule::overlap: return "overlap";
        case VerdictRule::at_most: return "at_most";
        case VerdictRule::below_ci_hi: return "below_ci_hi";
    }
    return "unknown";
}

VerdictRule verdict_rule_from_string(const std::string& s) {
    if (s == "overlap") return VerdictRule::overlap;
    if (s == "at_most") return VerdictRule::at_most;
    if (s == "below_ci_hi") return VerdictRule::below_ci_hi;
    throw InvalidArgument("unknown verdict rule: " + s);
}

Verdict evaluate(const VerdictSpec& spec, const std::vector<ReportRow>& rows) {
    auto find = [&](const std::string& q) -> const ReportRow& {
        for (const auto& r : rows)
            if (r.quantity == q) return r;
        throw InvalidArgument("verdict refers to missing quantity '" + q + "'");
    };
    Verdict v;
    v.spec = spec;
    const auto& a = find(spec.lhs);
    switch (spec.rule) {
        case VerdictRule::overlap: {
            const auto& b = find(spec.rhs);
            v.delta = std::abs(a.estimate - b.estimate);
            v.bound = 3.0 * (a.half_width() + b.half_width());
            v.pass = v.delta < v.bound;
            break;
        }
        case VerdictRule::at_most: {
            const auto& b = find(spec.rhs);
            v.delta = a.estimate - b.estimate;
            v.bound = a.half_width() + b.half_width();
            v.pass = v.delta <= v.bound;
            break;
        }
        case VerdictRule::below_ci_hi:
            v.delta = a.estimate;
            v.bound = a.ci_hi;
            v.pass = a.estimate < a.ci_hi;
            break;
    }
    return v;
}

std::vector<VerdictSpec> verdict_specs_for(const std::string& experiment, const std::vector<ReportRow>& rows) {
    auto has = [&](const std::string& q) {
        for (const auto& r : rows)
            if (r.quantity == q) return true;
        return false;
    };
    std::vector<VerdictSpec> specs;
    if (experiment == "variance-step0") {
        specs.push_back({"simulated vs theoretical selection variance", "v1_minus_sigma1", "v2", VerdictRule::overlap});
    } else if (experiment == "conjecture1") {
        specs.push_back({"ratio variance vs two-term decomposition", "v1", "composite", VerdictRule::overlap});
    } else if (experiment == "conjecture2") {
        for (const auto& r : rows)
            if (r.quantity.rfind("lhs_", 0) == 0) {
                const auto cell = r.quantity.substr(4);
                if (has("rhs_" + cell))
                    specs.push_back({"conjecture 2 cell " + cell, "lhs_" + cell, "rhs_" + cell, VerdictRule::overlap});
            }
    } else if (experiment == "variance-step1") {
        specs.push_back({"simulated vs conjectured selection variance", "v1_combined", "v2", VerdictRule::overlap});
    } else if (experiment == "clt") {
        specs.push_back({"Kolmogorov-Smirnov normality", "ks_statistic", "", VerdictRule::below_ci_hi});
    } else if (experiment == "compare-resamplers") {
        specs.push_back({"stratified exact <= multinomial exact", "exact_stratified", "exact_multinomial", VerdictRule::at_most});
        specs.push_back({"stratified <= multinomial", "mc_stratified", "mc_multinomial", VerdictRule::at_most});
        for (const char* s : {"stratified", "multinomial", "residual"})
            specs.push_back({std::string(s) + " simulation vs exact", std::string("mc_") + s, std::string("exact_") + s,
                             VerdictRule::overlap});
    }
    return specs;
}

std::string format_number(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string to_csv(const ExperimentReport& report) {
    std::ostringstream out;
    out << kCsvHeader << '\n';
    for (const auto& r : report.rows) {
        out << r.experiment << ',' << r.quantity << ',' << format_number(r.estimate) << ',' << format_number(r.ci_lo)
            << ',' << format_number(r.ci_hi) << ',' << r.n_samples << ',' << r.particles << ',' << r.seed << ','
            << format_number(r.wall_time_s) << '\n';
    }
    return out.str();
}

namespace {

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw InvalidArgument("bad number in CSV: " + s);
    return v;
}

template <class T>
T parse_unsigned(const std::string& s) {
    T v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw InvalidArgument("bad integer in CSV: " + s);
    return v;
}

}  // namespace

ExperimentReport parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw InvalidArgument("CSV header mismatch");
    ExperimentReport rep;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() != 9) throw InvalidArgument("CSV row needs 9 fields: " + line);
        ReportRow r;
        r.experiment = f[0];
        r.quantity = f[1];
        r.estimate = parse_double(f[2]);
        r.ci_lo = parse_double(f[3]);
        r.ci_hi = parse_double(f[4]);
        r.n_samples = parse_unsigned<std::size_t>(f[5]);
        r.particles = parse_unsigned<std::size_t>(f[6]);
        r.seed = parse_unsigned<std::uint64_t>(f[7]);
        r.wall_time_s = parse_double(f[8]);
        if (rep.experiment.empty()) rep.experiment = r.experiment;
        rep.rows.push_back(std::move(r));
    }
    rep.checks = verdict_specs_for(rep.experiment, rep.rows);
    return rep;
}

std::string to_json_text(const ExperimentReport& report) {
    nlohmann::json j;
    j["experiment"] = report.experiment;
    j["rows"] = nlohmann::json::array();
    for (const auto& r : report.rows)
        j["rows"].push_back({{"experiment", r.experiment}, {"quantity", r.quantity}, {"estimate", r.estimate},
                             {"ci_lo", r.ci_lo}, {"ci_hi", r.ci_hi}, {"n_samples", r.n_samples},
                             {"particles", r.particles}, {"seed", r.seed}, {"wall_time_s", r.wall_time_s}});
    j["verdicts"] = nlohmann::json::array();
    for (const auto& v : report.verdicts())
        j["verdicts"].push_back({{"label", v.spec.label}, {"lhs", v.spec.lhs}, {"rhs", v.spec.rhs},
                                 {"rule", to_string(v.spec.rule)}, {"delta", v.delta}, {"bound", v.bound},
                                 {"pass", v.pass}});
    j["passed"] = report.passed();
    return j.dump(2) + "\n";
}

}  // namespace smclab

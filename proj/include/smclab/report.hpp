#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "smclab/estimators.hpp"

namespace smclab {

struct ReportRow {
    std::string experiment;
    std::string quantity;
    double estimate = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t n_samples = 0;
    std::size_t particles = 0;
    std::uint64_t seed = 0;
    double wall_time_s = 0.0;

    double half_width() const { return 0.5 * (ci_hi - ci_lo); }
    bool operator==(const ReportRow&) const = default;
};

enum class VerdictRule {
    overlap,         // |a - b| < 3 (h_a + h_b)
    at_most,         // a <= b + (h_a + h_b)
    below_ci_hi,     // a.estimate < a.ci_hi, for test statistics reported with their critical value
};

struct VerdictSpec {
    std::string label;
    std::string lhs;
    std::string rhs;  // empty for single-row rules
    VerdictRule rule = VerdictRule::overlap;
};

struct Verdict {
    VerdictSpec spec;
    double delta = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct ExperimentReport {
    std::string experiment;
    std::vector<ReportRow> rows;
    std::vector<VerdictSpec> checks;

    const ReportRow& row(const std::string& quantity) const;
    std::vector<Verdict> verdicts() const;
    bool passed() const;

    void add(const std::string& quantity, const EstimateWithCI& e, std::size_t particles, std::uint64_t seed);
    void set_wall_time(double seconds);
};

std::string to_string(VerdictRule r);
VerdictRule verdict_rule_from_string(const std::string& s);

Verdict evaluate(const VerdictSpec& spec, const std::vector<ReportRow>& rows);

// Verdict specs recovered from the quantity names of an experiment's rows.
std::vector<VerdictSpec> verdict_specs_for(const std::string& experiment, const std::vector<ReportRow>& rows);

inline constexpr const char* kCsvHeader = "experiment,quantity,estimate,ci_lo,ci_hi,n_samples,particles,seed,wall_time_s";

std::string to_csv(const ExperimentReport& report);
ExperimentReport parse_csv(const std::string& text);
std::string to_json_text(const ExperimentReport& report);

std::string format_number(double v);

}  // namespace smclab

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "smclab/model.hpp"
#include "smclab/rng.hpp"

namespace smclab {

// Normalized weights w_i = M g_i / sum g and the derived stratum bookkeeping.
// Arrays indexed 0..M carry the conventions S_0 = 0, u_0 = 0, mu_0 = 1 and
// S_M = M exactly.
struct WeightProfile {
    std::vector<double> weights;             // w_1..w_M stored at 0..M-1
    std::vector<double> partial_sums;        // S_0..S_M
    std::vector<double> frac;                // u_i = {S_i}
    std::vector<std::int64_t> mu;            // mu_i = floor(S_i) + 1

    std::size_t size() const { return weights.size(); }
    double max_weight() const;
    double min_weight() const;
};

WeightProfile weight_profile(std::span<const double> potentials);
WeightProfile weight_profile(const ParticleSystem& ps);

enum class Scheme { stratified, multinomial, residual, systematic };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct ResampleOutcome {
    std::vector<std::size_t> ancestors;  // 0-based
    ParticleSystem selected;             // same generation as the source
};

// Stratum m picks the unique l with S_{l-1} < m - U_m <= S_l; one uniform per stratum.
std::vector<std::size_t> stratified_ancestors(const WeightProfile& profile, CounterRng& rng);
// Same selection from given uniforms, found by a merge walk instead of binary search.
std::vector<std::size_t> stratified_ancestors_merge(const WeightProfile& profile, std::span<const double> uniforms);
std::vector<std::size_t> stratified_ancestors_search(const WeightProfile& profile, std::span<const double> uniforms);

std::vector<std::size_t> baseline_ancestors(Scheme scheme, const WeightProfile& profile, CounterRng& rng);

ParticleSystem gather(const ParticleSystem& ps, std::span<const std::size_t> ancestors);

ResampleOutcome stratified_resample(const WeightProfile& profile, const ParticleSystem& ps, CounterRng& rng);
ResampleOutcome baseline_resample(Scheme scheme, const WeightProfile& profile, const ParticleSystem& ps, CounterRng& rng);
ResampleOutcome resample(Scheme scheme, const WeightProfile& profile, const ParticleSystem& ps, CounterRng& rng);

// Sparse row-major matrix of q_{m,i} = P(ancestor of stratum m is i | X).
struct SelectionCoefficients {
    std::size_t particles = 0;
    std::vector<std::size_t> row_start;  // size M+1
    std::vector<std::size_t> column;     // 0-based particle index
    std::vector<double> value;

    std::size_t rows() const { return particles; }
    std::size_t row_nonzeros(std::size_t m) const { return row_start[m + 1] - row_start[m]; }
    double row_sum(std::size_t m) const;
    std::vector<double> column_sums() const;
    std::vector<double> dense() const;  // M x M, row-major
};

SelectionCoefficients selection_coefficients(const WeightProfile& profile);

// E[f(Y^m) | X] for every stratum m.
std::vector<double> conditional_mean(const SelectionCoefficients& q, std::span<const double> f_values);

// Var((1/sqrt M) sum_m f(Y^m) | X) summed stratum by stratum from q.
double conditional_variance_oracle(const SelectionCoefficients& q, std::span<const double> f_values);

// The same quantity from the beta_0 / beta_1 lag expansion in O(M K),
// K = min(M-1, ceil(max w / min w)). max_lag overrides K (still capped at M-1).
double conditional_variance_exact(const WeightProfile& profile, std::span<const double> f_values,
                                  std::size_t max_lag = 0);

double multinomial_conditional_variance(const WeightProfile& profile, std::span<const double> f_values);
double residual_conditional_variance(const WeightProfile& profile, std::span<const double> f_values);

}  // namespace smclab

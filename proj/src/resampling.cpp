#include "smclab/resampling.hpp"

#include <algorithm>
#include <cmath>

#include "smclab/errors.hpp"
#include "smclab/variance_theory.hpp"

namespace smclab {

namespace {

constexpr double kSnap = 1e-12;

struct Kahan {
    double sum = 0.0, c = 0.0;
    void add(double x) {
        const double y = x - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

}  // namespace

double WeightProfile::max_weight() const { return *std::max_element(weights.begin(), weights.end()); }
double WeightProfile::min_weight() const { return *std::min_element(weights.begin(), weights.end()); }

WeightProfile weight_profile(std::span<const double> g) {
    const std::size_t M = g.size();
    if (M == 0) throw InvalidArgument("weight_profile: empty population");
    Kahan total;
    for (double v : g) {
        if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("weight_profile: potentials must be positive and finite");
        total.add(v);
    }
    WeightProfile p;
    p.weights.resize(M);
    p.partial_sums.assign(M + 1, 0.0);
    p.frac.assign(M + 1, 0.0);
    p.mu.assign(M + 1, 1);
    const double scale = static_cast<double>(M) / total.sum;
    Kahan run;
    for (std::size_t i = 0; i < M; ++i) {
        p.weights[i] = g[i] * scale;
        run.add(p.weights[i]);
        double s = run.sum;
        const double r = std::round(s);
        if (std::abs(s - r) < kSnap) s = r;
        p.partial_sums[i + 1] = s;
    }
    p.partial_sums[M] = static_cast<double>(M);
    for (std::size_t i = 1; i <= M; ++i) {
        // rounding can leave a partial sum a hair above M before the final one
        p.partial_sums[i] = std::min(p.partial_sums[i], static_cast<double>(M));
        const double s = p.partial_sums[i];
        const double fl = std::floor(s);
        p.frac[i] = s - fl;
        p.mu[i] = static_cast<std::int64_t>(fl) + 1;
    }
    return p;
}

WeightProfile weight_profile(const ParticleSystem& ps) { return weight_profile(ps.potentials); }

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::stratified: return "stratified";
        case Scheme::multinomial: return "multinomial";
        case Scheme::residual: return "residual";
        case Scheme::systematic: return "systematic";
    }
    return "unknown";
}

Scheme scheme_from_string(const std::string& s) {
    if (s == "stratified") return Scheme::stratified;
    if (s == "multinomial") return Scheme::multinomial;
    if (s == "residual") return Scheme::residual;
    if (s == "systematic") return Scheme::systematic;
    throw InvalidArgument("unknown resampling scheme: " + s);
}

namespace {

// first l in 1..M with S_l >= t, returned 0-based
std::size_t locate(const std::vector<double>& S, double t) {
    auto it = std::lower_bound(S.begin() + 1, S.end(), t);
    if (it == S.end()) --it;
    return static_cast<std::size_t>(it - S.begin()) - 1;
}

}  // namespace

std::vector<std::size_t> stratified_ancestors_search(const WeightProfile& profile, std::span<const double> uniforms) {
    const std::size_t M = profile.size();
    if (uniforms.size() != M) throw InvalidArgument("one uniform per stratum is required");
    std::vector<std::size_t> a(M);
    for (std::size_t m = 0; m < M; ++m) a[m] = locate(profile.partial_sums, static_cast<double>(m + 1) - uniforms[m]);
    return a;
}

std::vector<std::size_t> stratified_ancestors_merge(const WeightProfile& profile, std::span<const double> uniforms) {
    const std::size_t M = profile.size();
    if (uniforms.size() != M) throw InvalidArgument("one uniform per stratum is required");
    const auto& S = profile.partial_sums;
    std::vector<std::size_t> a(M);
    std::size_t l = 1;
    for (std::size_t m = 0; m < M; ++m) {
        const double t = static_cast<double>(m + 1) - uniforms[m];
        while (l < M && S[l] < t) ++l;
        a[m] = l - 1;
    }
    return a;
}

std::vector<std::size_t> stratified_ancestors(const WeightProfile& profile, CounterRng& rng) {
    const std::size_t M = profile.size();
    std::vector<std::size_t> a(M);
    for (std::size_t m = 0; m < M; ++m)
        a[m] = locate(profile.partial_sums, static_cast<double>(m + 1) - uniform01(rng));
    return a;
}

std::vector<std::size_t> baseline_ancestors(Scheme scheme, const WeightProfile& profile, CounterRng& rng) {
    const std::size_t M = profile.size();
    const auto& S = profile.partial_sums;
    std::vector<std::size_t> a;
    a.reserve(M);
    switch (scheme) {
        case Scheme::stratified:
            return stratified_ancestors(profile, rng);
        case Scheme::systematic: {
            const double u = uniform01(rng);
            for (std::size_t m = 0; m < M; ++m) a.push_back(locate(S, static_cast<double>(m + 1) - u));
            return a;
        }
        case Scheme::multinomial: {
            for (std::size_t m = 0; m < M; ++m) a.push_back(locate(S, uniform01_open_left(rng) * static_cast<double>(M)));
            return a;
        }
        case Scheme::residual: {
            std::vector<double> cum(M + 1, 0.0);
            std::size_t deterministic = 0;
            for (std::size_t i = 0; i < M; ++i) {
                const double fl = std::floor(profile.weights[i]);
                for (std::size_t c = 0; c < static_cast<std::size_t>(fl) && a.size() < M; ++c) a.push_back(i);
                deterministic += static_cast<std::size_t>(fl);
                cum[i + 1] = cum[i] + (profile.weights[i] - fl);
            }
            const std::size_t rest = deterministic >= M ? 0 : M - deterministic;
            for (std::size_t r = 0; r < rest; ++r) a.push_back(locate(cum, uniform01_open_left(rng) * cum[M]));
            return a;
        }
    }
    throw InvalidArgument("unknown resampling scheme");
}

ParticleSystem gather(const ParticleSystem& ps, std::span<const std::size_t> ancestors) {
    ParticleSystem out;
    out.dim = ps.dim;
    out.generation = ps.generation;
    out.positions.resize(ancestors.size() * ps.dim);
    out.potentials.resize(ancestors.size());
    const bool has_pot = ps.potentials.size() == ps.size();
    for (std::size_t m = 0; m < ancestors.size(); ++m) {
        const std::size_t a = ancestors[m];
        std::copy_n(ps.positions.begin() + a * ps.dim, ps.dim, out.positions.begin() + m * ps.dim);
        out.potentials[m] = has_pot ? ps.potentials[a] : 0.0;
    }
    if (!has_pot) out.potentials.clear();
    return out;
}

ResampleOutcome stratified_resample(const WeightProfile& profile, const ParticleSystem& ps, CounterRng& rng) {
    if (profile.size() != ps.size()) throw InvalidArgument("profile and population sizes differ");
    ResampleOutcome out;
    out.ancestors = stratified_ancestors(profile, rng);
    out.selected = gather(ps, out.ancestors);
    return out;
}

ResampleOutcome baseline_resample(Scheme scheme, const WeightProfile& profile, const ParticleSystem& ps, CounterRng& rng) {
    if (profile.size() != ps.size()) throw InvalidArgument("profile and population sizes differ");
    ResampleOutcome out;
    out.ancestors = baseline_ancestors(scheme, profile, rng);
    out.selected = gather(ps, out.ancestors);
    return out;
}

ResampleOutcome resample(Scheme scheme, const WeightProfile& profile, const ParticleSystem& ps, CounterRng& rng) {
    return scheme == Scheme::stratified ? stratified_resample(profile, ps, rng) : baseline_resample(scheme, profile, ps, rng);
}

double SelectionCoefficients::row_sum(std::size_t m) const {
    double s = 0.0;
    for (std::size_t k = row_start[m]; k < row_start[m + 1]; ++k) s += value[k];
    return s;
}

std::vector<double> SelectionCoefficients::column_sums() const {
    std::vector<double> c(particles, 0.0);
    for (std::size_t k = 0; k < value.size(); ++k) c[column[k]] += value[k];
    return c;
}

std::vector<double> SelectionCoefficients::dense() const {
    std::vector<double> d(particles * particles, 0.0);
    for (std::size_t m = 0; m < particles; ++m)
        for (std::size_t k = row_start[m]; k < row_start[m + 1]; ++k) d[m * particles + column[k]] = value[k];
    return d;
}

SelectionCoefficients selection_coefficients(const WeightProfile& p) {
    const std::size_t M = p.size();
    struct Entry {
        std::size_t m, i;
        double q;
    };
    std::vector<Entry> entries;
    entries.reserve(3 * M);
    const auto Mi = static_cast<std::int64_t>(M);
    for (std::size_t i = 1; i <= M; ++i) {
        const std::int64_t a = p.mu[i - 1], b = p.mu[i];
        auto push = [&](std::int64_t m, double q) {
            if (m >= 1 && m <= Mi && q > 0.0) entries.push_back({static_cast<std::size_t>(m - 1), i - 1, q});
        };
        if (a == b) {
            push(a, p.weights[i - 1]);
        } else {
            push(a, 1.0 - p.frac[i - 1]);
            for (std::int64_t m = a + 1; m < b; ++m) push(m, 1.0);
            push(b, p.frac[i]);
        }
    }
    SelectionCoefficients q;
    q.particles = M;
    q.row_start.assign(M + 1, 0);
    for (const auto& e : entries) ++q.row_start[e.m + 1];
    for (std::size_t m = 0; m < M; ++m) q.row_start[m + 1] += q.row_start[m];
    q.column.resize(entries.size());
    q.value.resize(entries.size());
    std::vector<std::size_t> fill(q.row_start.begin(), q.row_start.end() - 1);
    for (const auto& e : entries) {
        const std::size_t k = fill[e.m]++;
        q.column[k] = e.i;
        q.value[k] = e.q;
    }
    return q;
}

std::vector<double> conditional_mean(const SelectionCoefficients& q, std::span<const double> f) {
    if (f.size() != q.particles) throw InvalidArgument("f values must match the population size");
    std::vector<double> out(q.particles, 0.0);
    for (std::size_t m = 0; m < q.particles; ++m)
        for (std::size_t k = q.row_start[m]; k < q.row_start[m + 1]; ++k) out[m] += q.value[k] * f[q.column[k]];
    return out;
}

double conditional_variance_oracle(const SelectionCoefficients& q, std::span<const double> f) {
    const auto mean = conditional_mean(q, f);
    double total = 0.0;
    for (std::size_t m = 0; m < q.particles; ++m) {
        double v = 0.0;
        for (std::size_t k = q.row_start[m]; k < q.row_start[m + 1]; ++k) {
            const double d = f[q.column[k]] - mean[m];
            v += q.value[k] * d * d;
        }
        total += v;
    }
    return total / static_cast<double>(q.particles);
}

double conditional_variance_exact(const WeightProfile& p, std::span<const double> f, std::size_t max_lag) {
    const std::size_t M = p.size();
    if (f.size() != M) throw InvalidArgument("f values must match the population size");
    std::size_t K = max_lag;
    if (K == 0) K = static_cast<std::size_t>(std::ceil(p.max_weight() / p.min_weight()));
    K = std::min(K, M - 1);
    const auto& w = p.weights;
    double diag = 0.0;
    for (std::size_t i = 0; i < M; ++i) diag += f[i] * f[i] * beta0(p.frac[i], w[i]);
    double cross = 0.0;
    for (std::size_t i = 0; i + 1 < M; ++i) {
        double mid = 0.0;
        const std::size_t kmax = std::min(K, M - 1 - i);
        for (std::size_t k = 1; k <= kmax; ++k) {
            if (k >= 2) mid += w[i + k - 1];
            if (mid >= 1.0) break;
            cross += f[i] * f[i + k] * beta1(p.frac[i], w[i], mid, w[i + k]);
        }
    }
    return (diag - cross) / static_cast<double>(M);
}

double multinomial_conditional_variance(const WeightProfile& p, std::span<const double> f) {
    const std::size_t M = p.size();
    if (f.size() != M) throw InvalidArgument("f values must match the population size");
    double mean = 0.0;
    for (std::size_t i = 0; i < M; ++i) mean += p.weights[i] * f[i];
    mean /= static_cast<double>(M);
    double var = 0.0;
    for (std::size_t i = 0; i < M; ++i) var += p.weights[i] * (f[i] - mean) * (f[i] - mean);
    return var / static_cast<double>(M);
}

double residual_conditional_variance(const WeightProfile& p, std::span<const double> f) {
    const std::size_t M = p.size();
    if (f.size() != M) throw InvalidArgument("f values must match the population size");
    std::vector<double> r(M);
    double total = 0.0;
    std::size_t deterministic = 0;
    for (std::size_t i = 0; i < M; ++i) {
        const double fl = std::floor(p.weights[i]);
        deterministic += static_cast<std::size_t>(fl);
        r[i] = p.weights[i] - fl;
        total += r[i];
    }
    if (deterministic >= M || total <= 0.0) return 0.0;
    const double R = static_cast<double>(M - deterministic);
    double mean = 0.0;
    for (std::size_t i = 0; i < M; ++i) mean += r[i] * f[i];
    mean /= total;
    double var = 0.0;
    for (std::size_t i = 0; i < M; ++i) var += r[i] * (f[i] - mean) * (f[i] - mean);
    return R / static_cast<double>(M) * var / total;
}

}  // namespace smclab

#include "smclab/particle_filter.hpp"

#include <charconv>
#include <ostream>
#include <string>

#include "smclab/errors.hpp"

namespace smclab {

const StepRecord& FilterTrajectory::at(int n) const {
    for (const auto& r : records)
        if (r.step == n) return r;
    throw InvalidArgument("step " + std::to_string(n) + " is not stored in this trajectory");
}

FilterTrajectory run_filter(const Model& model, std::size_t particles, int n_steps, std::uint64_t seed,
                            FilterOptions options) {
    require(particles >= 1, "run_filter needs at least one particle");
    require(n_steps >= 0, "run_filter needs a non-negative step count");
    FilterTrajectory traj;
    traj.seed = seed;
    traj.particles = particles;
    traj.steps = n_steps;
    traj.scheme = options.scheme;

    StepRecord rec;
    {
        CounterRng rng(derive_key(seed, {purpose::initial, 0}));
        rec.mutated = sample_initial(model, particles, rng);
        rec.selected = rec.mutated;
        rec.profile = weight_profile(rec.mutated);
    }
    for (int n = 1; n <= n_steps; ++n) {
        StepRecord next;
        next.step = n;
        CounterRng sel(derive_key(seed, {purpose::selection, static_cast<std::uint64_t>(n)}));
        auto outcome = resample(options.scheme, rec.profile, rec.mutated, sel);
        next.ancestors = std::move(outcome.ancestors);
        next.selected = std::move(outcome.selected);
        CounterRng mut(derive_key(seed, {purpose::mutation, static_cast<std::uint64_t>(n)}));
        next.mutated = mutate(next.selected, model, mut);
        next.profile = weight_profile(next.mutated);
        if (options.keep_history) traj.records.push_back(std::move(rec));
        rec = std::move(next);
    }
    traj.records.push_back(std::move(rec));
    return traj;
}

double k_tuple_mean(const ParticleSystem& ps, std::size_t k, const WindowFn& h) {
    const std::size_t M = ps.size();
    require(k < M, "window length must be smaller than the population");
    double s = 0.0;
    for (std::size_t i = 0; i + k < M; ++i)
        s += h(std::span<const double>(ps.positions.data() + i * ps.dim, (k + 1) * ps.dim));
    return s / static_cast<double>(M);
}

double k_tuple_mean(const FilterTrajectory& traj, int n, std::size_t k, const WindowFn& h) {
    return k_tuple_mean(traj.at(n).mutated, k, h);
}

double conjecture2_lhs(const FilterTrajectory& traj, int n, std::size_t t, const WindowFn& h, const PsiFn& psi) {
    const auto& rec = traj.at(n);
    const auto& ps = rec.mutated;
    const std::size_t M = ps.size();
    require(t >= 1 && t < M, "tuple length must lie in [1, M-1]");
    double s = 0.0;
    for (std::size_t i = 0; i + t < M; ++i) {
        const std::span<const double> x(ps.positions.data() + i * ps.dim, (t + 1) * ps.dim);
        const std::span<const double> w(rec.profile.weights.data() + i, t + 1);
        s += h(x) * psi(rec.profile.frac[i], w);
    }
    return s / static_cast<double>(M);
}

double conjecture2_rhs(const FilterTrajectory& traj, const Model& model, int n, std::size_t t, const WindowFn& h,
                       const PsiFn& psi, CounterRng& rng) {
    const auto& ps = traj.at(n).mutated;
    const std::size_t M = ps.size();
    require(t >= 1 && t < M, "tuple length must lie in [1, M-1]");
    const double c = model.eta_bar(n, model.potential(n).fn);
    std::vector<double> gt(ps.potentials.size());
    for (std::size_t i = 0; i < gt.size(); ++i) gt[i] = ps.potentials[i] / c;
    const double u = uniform01(rng);
    double s = 0.0;
    for (std::size_t i = 0; i + t < M; ++i) {
        const std::span<const double> x(ps.positions.data() + i * ps.dim, (t + 1) * ps.dim);
        s += h(x) * psi(u, std::span<const double>(gt.data() + i, t + 1));
    }
    return s / static_cast<double>(M);
}

namespace {

void put_number(std::ostream& out, double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, r.ptr - buf);
}

void put_point(std::ostream& out, const ParticleSystem& ps, std::size_t i) {
    for (std::size_t d = 0; d < ps.dim; ++d) {
        if (d) out << ';';
        put_number(out, ps.positions[i * ps.dim + d]);
    }
}

}  // namespace

void write_trajectory_csv(const FilterTrajectory& traj, std::ostream& out) {
    out << "step,index,y_position,x_position,weight\n";
    for (const auto& rec : traj.records) {
        for (std::size_t i = 0; i < rec.mutated.size(); ++i) {
            out << rec.step << ',' << i << ',';
            put_point(out, rec.selected, i);
            out << ',';
            put_point(out, rec.mutated, i);
            out << ',';
            put_number(out, rec.profile.weights[i]);
            out << '\n';
        }
    }
    if (!out) throw IoError("failed to write trajectory");
}

}  // namespace smclab

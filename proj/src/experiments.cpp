#include "smclab/experiments.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

#include "smclab/errors.hpp"
#include "smclab/parallel.hpp"
#include "smclab/particle_filter.hpp"
#include "smclab/resampling.hpp"
#include "smclab/variance_theory.hpp"

namespace smclab {

namespace {

namespace tag {
constexpr std::uint64_t step0 = 1;
constexpr std::uint64_t ratio1 = 2;
constexpr std::uint64_t transformed = 3;
constexpr std::uint64_t conj2 = 4;
constexpr std::uint64_t selected2 = 5;
constexpr std::uint64_t transformed_step1 = 6;
constexpr std::uint64_t window_step1 = 7;
constexpr std::uint64_t clt = 8;
}  // namespace tag

std::uint64_t replicate_key(std::uint64_t seed, std::uint64_t t, std::size_t r) {
    return derive_key(seed, {purpose::replicate, t, static_cast<std::uint64_t>(r)});
}

std::uint64_t tuples_key(std::uint64_t seed) { return derive_key(seed, {purpose::tuples, 0}); }

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void finish(ExperimentReport& rep, const ExperimentConfig& cfg, const Stopwatch& clock) {
    rep.checks = verdict_specs_for(rep.experiment, rep.rows);
    rep.set_wall_time(cfg.timing ? clock.seconds() : 0.0);
}

ExperimentReport new_report(const ExperimentConfig& cfg) {
    validate(cfg);
    ExperimentReport rep;
    rep.experiment = cfg.experiment;
    return rep;
}

// sum_m h(X^{a_m}) for ancestors drawn at the next selection step from the last
// record of a filter run, matching the lineage run_filter itself would use.
double next_selection_sum(const FilterTrajectory& traj, std::uint64_t key, std::span<const double> h_values) {
    const auto& rec = traj.last();
    CounterRng sel(derive_key(key, {purpose::selection, static_cast<std::uint64_t>(rec.step + 1)}));
    const auto anc = stratified_ancestors(rec.profile, sel);
    double s = 0.0;
    for (auto a : anc) s += h_values[a];
    return s;
}

std::vector<double> values_on(const TestFunction& h, const ParticleSystem& ps) { return evaluate(h, ps); }

// (1/sqrt M) sum h(Y_1) over independent replicates.
std::vector<double> first_selection_draws(const Model& model, const ExperimentConfig& cfg, const TestFunction& h,
                                          std::uint64_t t) {
    const double root = std::sqrt(static_cast<double>(cfg.particles));
    return parallel_map(cfg.replicates, cfg.workers, [&](std::size_t r) {
        const auto key = replicate_key(cfg.seed, t, r);
        const auto traj = run_filter(model, cfg.particles, 0, key, {Scheme::stratified, false});
        return next_selection_sum(traj, key, values_on(h, traj.last().mutated)) / root;
    });
}

}  // namespace

ExperimentReport run_variance_step0(const ExperimentConfig& cfg) {
    Stopwatch clock;
    auto rep = new_report(cfg);
    const auto model = build_model(cfg);
    const auto& f = model.test_function();

    const auto draws = first_selection_draws(model, cfg, f, tag::step0);
    const auto v1 = variance_estimate(draws, cfg.level);
    const auto s1 = sigma1_sq(model, f);

    std::vector<std::vector<double>> per_k;
    const auto totals = sigma2_samples(model, f, Sigma2Method::closed_form_mc, cfg.replicates2, tuples_key(cfg.seed), &per_k);
    const auto v2 = mean_estimate(totals, cfg.level);

    rep.add("v1", v1, cfg.particles, cfg.seed);
    rep.add("sigma1_sq", s1, cfg.particles, cfg.seed);
    rep.add("v1_minus_sigma1", v1.shifted(-s1.point), cfg.particles, cfg.seed);
    rep.add("v2", v2, cfg.particles, cfg.seed);
    for (std::size_t k = 0; k < per_k.size(); ++k)
        rep.add("v2_k" + std::to_string(k), mean_estimate(per_k[k], cfg.level), cfg.particles, cfg.seed);
    finish(rep, cfg, clock);
    return rep;
}

ExperimentReport run_conjecture1(const ExperimentConfig& cfg) {
    Stopwatch clock;
    auto rep = new_report(cfg);
    const auto model = build_model(cfg);
    const auto& f = model.test_function();
    const auto g1 = model.potential(1).fn;
    const double a1 = model.eta_bar(1, g1);
    const double target = model.eta_bar(1, g1 * f) / a1;
    const double a4 = a1 * a1 * a1 * a1;
    const double root = std::sqrt(static_cast<double>(cfg.particles));

    const auto t_draws = parallel_map(cfg.replicates, cfg.workers, [&](std::size_t r) {
        const auto traj = run_filter(model, cfg.particles, 1, replicate_key(cfg.seed, tag::ratio1, r), {Scheme::stratified, false});
        const auto& x = traj.last().mutated;
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            num += x.potentials[i] * f(x.position(i));
            den += x.potentials[i];
        }
        return root * (num / den - target);
    });
    const auto pf = transformed_test_function(model, 1, f);
    const auto h_draws = first_selection_draws(model, cfg, pf, tag::transformed);
    const double mutation = mutation_variance_term(model, 1, f);

    const auto v1 = variance_estimate(t_draws, cfg.level);
    const auto vh = variance_estimate(h_draws, cfg.level);
    rep.add("v1", v1, cfg.particles, cfg.seed);
    rep.add("v_transformed", vh, cfg.particles, cfg.seed);
    rep.add("mutation_term", EstimateWithCI::exact(mutation), cfg.particles, cfg.seed);
    rep.add("composite", vh.scaled(1.0 / a4).shifted(mutation), cfg.particles, cfg.seed);
    const auto theory = first_selection_variance(model, pf, cfg.replicates2, cfg.seed);
    rep.add("composite_theory", theory.scaled(1.0 / a4).shifted(mutation), cfg.particles, cfg.seed);
    finish(rep, cfg, clock);
    return rep;
}

ExperimentReport run_conjecture2(const ExperimentConfig& cfg) {
    Stopwatch clock;
    auto rep = new_report(cfg);
    const auto model = build_model(cfg);
    const int n = cfg.step;
    const std::size_t t = cfg.tuple;
    const WindowFn h = [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += v;
        return s;
    };
    const PsiFn psi_sum = [](double u, std::span<const double> w) {
        double s = u;
        for (double v : w) s += v;
        return s;
    };
    std::vector<double> lhs(cfg.replicates), rhs(cfg.replicates);
    parallel_for(cfg.replicates, cfg.workers, [&](std::size_t r) {
        const auto key = replicate_key(cfg.seed, tag::conj2, r);
        const auto traj = run_filter(model, cfg.particles, n, key, {Scheme::stratified, false});
        CounterRng u(derive_key(key, {purpose::shared_u}));
        lhs[r] = conjecture2_lhs(traj, n, t, h, psi_sum);
        rhs[r] = conjecture2_rhs(traj, model, n, t, h, psi_sum, u);
    });
    const auto cell = "n" + std::to_string(n) + "_t" + std::to_string(t);
    rep.add("lhs_" + cell, mean_estimate(lhs, cfg.level), cfg.particles, cfg.seed);
    rep.add("rhs_" + cell, mean_estimate(rhs, cfg.level), cfg.particles, cfg.seed);
    finish(rep, cfg, clock);
    return rep;
}

ExperimentReport run_variance_step1(const ExperimentConfig& cfg) {
    Stopwatch clock;
    auto rep = new_report(cfg);
    const auto model = build_model(cfg);
    const auto& f = model.test_function();
    const auto g1 = model.potential(1);
    const double a1 = model.eta_bar(1, g1.fn);
    const double a4 = a1 * a1 * a1 * a1;
    const double root = std::sqrt(static_cast<double>(cfg.particles));

    const auto y2_draws = parallel_map(cfg.replicates, cfg.workers, [&](std::size_t r) {
        const auto key = replicate_key(cfg.seed, tag::selected2, r);
        const auto traj = run_filter(model, cfg.particles, 1, key, {Scheme::stratified, false});
        return next_selection_sum(traj, key, values_on(f, traj.last().mutated)) / root;
    });
    const auto pf = transformed_test_function(model, 1, f);
    const auto h_draws = first_selection_draws(model, cfg, pf, tag::transformed_step1);
    const double mutation = mutation_variance_term(model, 1, f);

    const std::size_t K = phi_n(g1.ratio(), 0);
    if (K + 1 > cfg.particles) throw InvalidConfig("particles must exceed phi_1(0)");
    const auto v2_draws = parallel_map(cfg.replicates2, cfg.workers, [&](std::size_t r) {
        const auto traj = run_filter(model, cfg.particles, 1, replicate_key(cfg.seed, tag::window_step1, r), {Scheme::stratified, false});
        const auto& x = traj.last().mutated;
        const auto fv = values_on(f, x);
        std::vector<double> gt(x.size());
        for (std::size_t i = 0; i < gt.size(); ++i) gt[i] = x.potentials[i] / a1;
        const std::size_t M = x.size();
        double s = 0.0;
        for (std::size_t k = 0; k <= K; ++k)
            for (std::size_t i = 0; i + k < M; ++i)
                s += phi_k_closed(k, fv[i], fv[i + k], std::span<const double>(gt.data() + i, k + 1));
        return s / static_cast<double>(M);
    });

    const auto v11 = variance_estimate(y2_draws, cfg.level);
    const auto v12 = variance_estimate(h_draws, cfg.level);
    EstimateWithCI combined;
    combined.point = v11.point - v12.point / a4 - mutation;
    combined.lo = v11.lo - v12.hi / a4 - mutation;
    combined.hi = v11.hi - v12.lo / a4 - mutation;
    combined.n = cfg.replicates;
    combined.level = cfg.level;
    combined.kind = EstimateKind::derived;

    rep.add("v11", v11, cfg.particles, cfg.seed);
    rep.add("v12", v12, cfg.particles, cfg.seed);
    rep.add("mutation_term", EstimateWithCI::exact(mutation), cfg.particles, cfg.seed);
    rep.add("v1_combined", combined, cfg.particles, cfg.seed);
    rep.add("v2", mean_estimate(v2_draws, cfg.level), cfg.particles, cfg.seed);
    finish(rep, cfg, clock);
    return rep;
}

ExperimentReport run_clt(const ExperimentConfig& cfg) {
    Stopwatch clock;
    auto rep = new_report(cfg);
    const auto model = build_model(cfg);
    const auto& f = model.test_function();
    const auto g0 = model.potential(0).fn;
    const double centre = model.eta_bar(0, g0 * f) / model.eta_bar(0, g0);
    const double root = std::sqrt(static_cast<double>(cfg.particles));

    auto z = first_selection_draws(model, cfg, f, tag::clt);
    for (auto& v : z) v -= root * centre;

    const auto s1 = sigma1_sq(model, f);
    const auto totals = sigma2_samples(model, f, Sigma2Method::closed_form_mc, cfg.replicates2, tuples_key(cfg.seed));
    const auto v2 = mean_estimate(totals, cfg.level);
    const auto asym = v2.shifted(s1.point);
    const auto ks = normality_check(z, 0.0, asym.point, 1.0 - cfg.level);

    rep.add("mean", mean_estimate(z, cfg.level), cfg.particles, cfg.seed);
    rep.add("variance", variance_estimate(z, cfg.level), cfg.particles, cfg.seed);
    rep.add("asymptotic_variance", asym, cfg.particles, cfg.seed);
    EstimateWithCI d{ks.statistic, 0.0, ks.critical, ks.n, cfg.level, EstimateKind::derived};
    rep.add("ks_statistic", d, cfg.particles, cfg.seed);
    finish(rep, cfg, clock);
    return rep;
}

ExperimentReport run_compare_resamplers(const ExperimentConfig& cfg) {
    Stopwatch clock;
    auto rep = new_report(cfg);
    const auto model = build_model(cfg);
    CounterRng pop_rng(derive_key(cfg.seed, {purpose::population}));
    const auto pop = sample_initial(model, cfg.particles, pop_rng);
    const auto profile = weight_profile(pop);
    const auto fv = evaluate(model.test_function(), pop);
    const double root = std::sqrt(static_cast<double>(cfg.particles));

    for (auto scheme : {Scheme::stratified, Scheme::multinomial, Scheme::residual, Scheme::systematic}) {
        const auto draws = parallel_map(cfg.replicates, cfg.workers, [&](std::size_t r) {
            CounterRng rng(derive_key(cfg.seed, {purpose::resample, static_cast<std::uint64_t>(scheme), r}));
            const auto anc = baseline_ancestors(scheme, profile, rng);
            double s = 0.0;
            for (auto a : anc) s += fv[a];
            return s / root;
        });
        rep.add("mc_" + to_string(scheme), variance_estimate(draws, cfg.level), cfg.particles, cfg.seed);
    }
    rep.add("exact_stratified", EstimateWithCI::exact(conditional_variance_exact(profile, fv)), cfg.particles, cfg.seed);
    rep.add("exact_multinomial", EstimateWithCI::exact(multinomial_conditional_variance(profile, fv)), cfg.particles, cfg.seed);
    rep.add("exact_residual", EstimateWithCI::exact(residual_conditional_variance(profile, fv)), cfg.particles, cfg.seed);
    finish(rep, cfg, clock);
    return rep;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    const auto& e = cfg.experiment;
    if (e == "variance-step0") return run_variance_step0(cfg);
    if (e == "conjecture1") return run_conjecture1(cfg);
    if (e == "conjecture2") return run_conjecture2(cfg);
    if (e == "variance-step1") return run_variance_step1(cfg);
    if (e == "clt") return run_clt(cfg);
    if (e == "compare-resamplers") return run_compare_resamplers(cfg);
    throw InvalidConfig("experiment '" + e + "' does not produce a report");
}

void write_beta_table(const ExperimentConfig& cfg, std::ostream& out) {
    validate(cfg);
    const auto& b = cfg.beta_table;
    const std::size_t P = b.points;
    auto grid = [P](double lo, double hi, std::size_t i) { return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(P - 1); };
    const auto num = format_number;
    if (b.function == "beta0") {
        out << "x,y1,value\n";
        for (std::size_t i = 0; i < P; ++i)
            for (std::size_t j = 0; j < P; ++j) {
                const double x = grid(0, 1, i), y = grid(0, 3, j);
                out << num(x) << ',' << num(y) << ',' << num(beta0(x, y)) << '\n';
            }
    } else if (b.function == "beta1") {
        out << "x,y1,y2,y3,value\n";
        for (std::size_t i = 0; i < P; ++i)
            for (std::size_t j = 0; j < P; ++j) {
                const double x = grid(0, 1, i), y = grid(0, 3, j);
                out << num(x) << ',' << num(y) << ',' << num(b.y2) << ',' << num(b.y3) << ','
                    << num(beta1(x, y, b.y2, b.y3)) << '\n';
            }
    } else if (b.function == "phi0") {
        out << "y1,value\n";
        for (std::size_t i = 0; i < P; ++i) {
            const double y = grid(0, 3, i);
            const double g[1] = {y};
            out << num(y) << ',' << num(phi_k_closed(0, 1.0, 1.0, g)) << '\n';
        }
    } else {
        out << "y1,y2,y3,value\n";
        for (std::size_t i = 0; i < P; ++i)
            for (std::size_t j = 0; j < P; ++j) {
                const double y1 = grid(0, 3, i), y3 = grid(0, 3, j);
                const double g[3] = {y1, b.y2, y3};
                out << num(y1) << ',' << num(b.y2) << ',' << num(y3) << ',' << num(phi_k_closed(2, 1.0, 1.0, g)) << '\n';
            }
    }
    if (!out) throw IoError("failed to write beta table");
}

void write_trajectory(const ExperimentConfig& cfg, std::ostream& out) {
    const auto model = build_model(cfg);
    require(cfg.step >= 0, "step must be non-negative");
    const auto traj = run_filter(model, cfg.particles, cfg.step, cfg.seed);
    write_trajectory_csv(traj, out);
}

}  // namespace smclab

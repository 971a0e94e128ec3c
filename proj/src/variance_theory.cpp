#include "smclab/variance_theory.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "smclab/errors.hpp"
#include "smclab/particle_filter.hpp"

namespace smclab {

namespace {

double frac(double v) { return v - std::floor(v); }

double cube(double v) { return v * v * v; }

}  // namespace

double beta0(double x, double y, bool clamp) {
    if (clamp) {
        x = std::clamp(x, 0.0, 1.0);
        y = std::max(0.0, y);
    }
    const double s = frac(x + y);
    double v = s * (1.0 - s) + x * (1.0 - x);
    if (y < 1.0 - x) v -= 2.0 * x * (1.0 - x - y);
    return v;
}

double beta1(double x, double y1, double y2, double y3, bool clamp) {
    if (clamp) {
        x = std::clamp(x, 0.0, 1.0);
        y1 = std::max(0.0, y1);
        y2 = std::max(0.0, y2);
        y3 = std::max(0.0, y3);
    }
    const double z = frac(x + y1);
    double v = 0.0;
    if (y2 < 1.0 - z) v += z * (1.0 - z - y2);
    if (y2 + y3 < 1.0 - z) v -= z * (1.0 - z - y2 - y3);
    if (y1 + y2 < 1.0 - x) v -= x * (1.0 - x - y1 - y2);
    if (y1 + y2 + y3 < 1.0 - x) v += x * (1.0 - x - y1 - y2 - y3);
    return 2.0 * v;
}

double bar_beta(std::size_t k, double u, std::span<const double> y) {
    require(y.size() == k + 1, "bar_beta needs k+1 weights");
    if (k == 0) return beta0(u, y[0]);
    double mid = 0.0;
    for (std::size_t l = 1; l < k; ++l) mid += y[l];
    return -beta1(u, y[0], mid, y[k]);
}

double integrate_bar_beta(std::size_t k, std::span<const double> y) {
    require(y.size() == k + 1, "integrate_bar_beta needs k+1 weights");
    std::vector<double> cuts = {0.0, 1.0};
    double mid = 0.0;
    for (std::size_t l = 1; l < k; ++l) mid += y[l];
    std::vector<double> shifts = {y[0]};
    if (k >= 1) {
        shifts.push_back(y[0] + mid);
        shifts.push_back(y[0] + mid + y[k]);
    }
    for (double c : shifts) cuts.push_back(frac(-c));
    std::sort(cuts.begin(), cuts.end());
    // three-point Gauss-Legendre is exact on each quadratic piece
    static const std::array<double, 3> nodes = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
    static const std::array<double, 3> weights = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    double total = 0.0;
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        const double a = cuts[p], b = cuts[p + 1];
        if (b - a <= 0.0) continue;
        const double h = 0.5 * (b - a), c = 0.5 * (a + b);
        double s = 0.0;
        for (int j = 0; j < 3; ++j) s += weights[j] * bar_beta(k, c + h * nodes[j], y);
        total += h * s;
    }
    return total;
}

double phi_k_closed(std::size_t k, double f_first, double f_last, std::span<const double> g) {
    require(g.size() == k + 1, "phi_k_closed needs k+1 potential values");
    const double ff = f_first * f_last;
    if (k == 0) {
        const double y = g[0];
        return ff * (1.0 - (y < 1.0 ? cube(1.0 - y) : 0.0)) / 3.0;
    }
    double mid = 0.0;
    for (std::size_t l = 1; l < k; ++l) mid += g[l];
    if (!(mid < 1.0)) return 0.0;
    const double first = g[0], last = g[k];
    const double total = first + mid + last;
    const double head = first + mid, tail = mid + last;
    double v;
    if (total < 1.0) {
        v = 0.5 * first * last * (2.0 - 2.0 * mid - (first + last));
    } else {
        v = cube(1.0 - mid) / 6.0;
        if (head < 1.0) v -= cube(1.0 - head) / 6.0;
        if (tail < 1.0) v -= cube(1.0 - tail) / 6.0;
    }
    return -2.0 * ff * v;
}

std::size_t phi_n(double ratio, std::size_t k) {
    if (!(ratio >= 1.0) || !std::isfinite(ratio)) throw InvalidArgument("potential ratio must be a finite value >= 1");
    return static_cast<std::size_t>(std::ceil(ratio * (1.0 + static_cast<double>(k))));
}

std::size_t phi_n(const Model& model, int n, std::size_t k) { return phi_n(model.potential(n).ratio(), k); }

double psi(std::span<const std::size_t> s, double u, std::span<const double> y, std::size_t i_max) {
    for (std::size_t q = 0; q < s.size(); ++q)
        require(s[q] >= 1 && (q == 0 || s[q] > s[q - 1]), "psi needs strictly increasing positive indices");
    const std::size_t last = s.empty() ? 0 : s.back();
    require(y.size() > last, "psi needs weights up to the last index");
    std::vector<double> prefix(last + 2, u);
    for (std::size_t j = 0; j <= last; ++j) prefix[j + 1] = prefix[j] + y[j];
    std::vector<std::size_t> idx = {0};
    idx.insert(idx.end(), s.begin(), s.end());
    double total = 0.0;
    for (std::size_t i = 1; i <= i_max; ++i) {
        double prod = 1.0;
        for (std::size_t q = 0; q < idx.size() && prod != 0.0; ++q) {
            const double lo = static_cast<double>(i + q) - 1.0, hi = static_cast<double>(i + q);
            const double a = prefix[idx[q]], b = prefix[idx[q] + 1];
            prod *= std::max(0.0, std::min(hi, b) - std::max(lo, a));
        }
        total += prod;
    }
    return total;
}

namespace {

double eta_mass(const Model& model, const TestFunction& h) { return model.initial_integral(h); }

}  // namespace

EstimateWithCI sigma1_sq(const Model& model, const TestFunction& h, CounterRng* rng, std::size_t samples) {
    const auto g0 = model.potential(0).fn;
    try {
        const double a = eta_mass(model, g0);
        const double c = eta_mass(model, g0 * h) / a;
        const auto centred = g0 * h.shifted(-c);
        return EstimateWithCI::exact(eta_mass(model, centred * centred) / (a * a));
    } catch (const NotImplemented&) {
        if (!rng) throw;
    }
    require(samples >= 2, "sigma1_sq needs at least two Monte Carlo samples");
    std::vector<double> xs(samples * model.dim()), gv(samples), hv(samples);
    for (std::size_t j = 0; j < samples; ++j) {
        std::span<double> x(xs.data() + j * model.dim(), model.dim());
        model.initial().sample(x, *rng);
        gv[j] = g0(Point(x.data(), x.size()));
        hv[j] = h(Point(x.data(), x.size()));
    }
    const double a = pairwise_sum(gv) / static_cast<double>(samples);
    std::vector<double> gh(samples);
    for (std::size_t j = 0; j < samples; ++j) gh[j] = gv[j] * hv[j];
    const double c = pairwise_sum(gh) / static_cast<double>(samples) / a;
    std::vector<double> vals(samples);
    for (std::size_t j = 0; j < samples; ++j) {
        const double d = gv[j] * (hv[j] - c) / a;
        vals[j] = d * d;
    }
    return mean_estimate(vals);
}

std::vector<double> sigma2_samples(const Model& model, const TestFunction& h, Sigma2Method method,
                                   std::size_t samples, std::uint64_t key, std::vector<std::vector<double>>* per_k) {
    const auto g = model.normalized_potential(0);
    const std::size_t K = phi_n(g.ratio(), 0);
    const std::size_t d = model.dim();
    if (per_k) per_k->assign(K + 1, std::vector<double>(samples, 0.0));
    std::vector<double> totals(samples, 0.0);
    std::vector<double> pts((K + 1) * d), fv(K + 1), gv(K + 1);
    for (std::size_t j = 0; j < samples; ++j) {
        CounterRng rng(key, j);
        for (std::size_t q = 0; q <= K; ++q) {
            std::span<double> x(pts.data() + q * d, d);
            model.initial().sample(x, rng);
            fv[q] = h(Point(x.data(), d));
            gv[q] = g(Point(x.data(), d));
        }
        const double u = method == Sigma2Method::beta_mc ? uniform01(rng) : 0.0;
        double s = 0.0;
        for (std::size_t k = 0; k <= K; ++k) {
            const std::span<const double> y(gv.data(), k + 1);
            const double v = method == Sigma2Method::closed_form_mc ? phi_k_closed(k, fv[0], fv[k], y)
                                                                    : fv[0] * fv[k] * bar_beta(k, u, y);
            if (per_k) (*per_k)[k][j] = v;
            s += v;
        }
        totals[j] = s;
    }
    return totals;
}

Sigma2Result sigma2_sq(const Model& model, const TestFunction& h, Sigma2Method method, std::size_t samples,
                       CounterRng& rng) {
    require(samples >= 2, "sigma2_sq needs at least two samples");
    std::vector<std::vector<double>> per_k;
    const auto totals = sigma2_samples(model, h, method, samples, rng(), &per_k);
    Sigma2Result r;
    r.method = method;
    r.lags = per_k.size() - 1;
    r.total = mean_estimate(totals);
    for (const auto& col : per_k) r.per_k.push_back(mean_estimate(col));
    return r;
}

EstimateWithCI VarianceReport::total() const {
    auto t = sigma2_sq.total.shifted(sigma1_sq.point);
    if (sigma1_sq.kind != EstimateKind::exact) {
        t.lo += sigma1_sq.lo - sigma1_sq.point;
        t.hi += sigma1_sq.hi - sigma1_sq.point;
    }
    return t;
}

VarianceReport variance_report(const Model& model, const TestFunction& h, Sigma2Method method, std::size_t samples,
                               CounterRng& rng) {
    VarianceReport r;
    r.sigma1_sq = sigma1_sq(model, h, &rng, samples);
    r.sigma2_sq = sigma2_sq(model, h, method, samples, rng);
    return r;
}

BarF::BarF(TestFunction f, PotentialSpec gtilde, double ratio)
    : f_(std::move(f)), gtilde_(std::move(gtilde)), arity_(phi_n(ratio, 0) + 1) {}

double BarF::from_values(std::span<const double> fv, std::span<const double> gv) const {
    require(fv.size() == arity_ && gv.size() == arity_, "bar f needs phi_n(0)+1 values");
    double s = 0.0;
    for (std::size_t k = 0; k < arity_; ++k) s += phi_k_closed(k, fv[0], fv[k], gv.first(k + 1));
    return s;
}

double BarF::operator()(std::span<const double> points) const {
    require(points.size() % arity_ == 0, "bar f needs phi_n(0)+1 points");
    const std::size_t d = points.size() / arity_;
    std::vector<double> fv(arity_), gv(arity_);
    for (std::size_t q = 0; q < arity_; ++q) {
        const Point x = points.subspan(q * d, d);
        fv[q] = f_(x);
        gv[q] = gtilde_(x);
    }
    return from_values(fv, gv);
}

BarF build_bar_f_n(const TestFunction& f, const PotentialSpec& gtilde, double ratio) { return BarF(f, gtilde, ratio); }

TestFunction centred_test_function(const Model& model, int n, const TestFunction& f) {
    const auto g = model.potential(n).fn;
    const double a = model.eta_bar(n, g);
    const double b = model.eta_bar(n, g * f);
    return g * (f * a).shifted(-b);
}

TestFunction transformed_test_function(const Model& model, int n, const TestFunction& f) {
    return model.kernel().apply(centred_test_function(model, n, f));
}

double mutation_variance_term(const Model& model, int n, const TestFunction& f) {
    require(n >= 1, "the mutation term needs n >= 1");
    const double a = model.eta_bar(n, model.potential(n).fn);
    const auto fn = centred_test_function(model, n, f);
    const auto pf = model.kernel().apply(fn);
    const auto pf2 = model.kernel().apply(fn * fn);
    return model.eta_tilde(n, pf2 - pf * pf) / (a * a * a * a);
}

RecursiveVarianceTerms recursive_variance_step(const Model& model, int n, const TestFunction& f, double v_n,
                                               std::size_t replicates, std::size_t particles, std::uint64_t seed) {
    require(n >= 1, "the recursion starts at n = 1");
    require(replicates >= 2, "recursive_variance_step needs at least two replicates");
    const auto g = model.normalized_potential(n);
    const std::size_t phi = phi_n(g.ratio(), 0);
    require(particles > phi, "population must exceed phi_n(0)");
    const double a = model.eta_bar(n, model.potential(n).fn);

    RecursiveVarianceTerms r;
    r.propagated = v_n / (a * a * a * a);
    r.mutation = mutation_variance_term(model, n, f);

    const auto bar_f = build_bar_f_n(f, g, g.ratio());
    std::vector<double> draws(replicates);
    for (std::size_t j = 0; j < replicates; ++j) {
        auto traj = run_filter(model, particles, n, derive_key(seed, {purpose::replicate, j}), {Scheme::stratified, false});
        draws[j] = k_tuple_mean(traj.last().mutated, phi, [&](std::span<const double> x) { return bar_f(x); });
    }
    r.selection = mean_estimate(draws);
    r.total = r.selection.shifted(r.propagated + r.mutation);
    return r;
}

EstimateWithCI first_selection_variance(const Model& model, const TestFunction& h, std::size_t samples,
                                        std::uint64_t seed) {
    CounterRng rng(derive_key(seed, {purpose::tuples}));
    const auto s1 = sigma1_sq(model, h, &rng, samples);
    std::vector<double> draws = sigma2_samples(model, h, Sigma2Method::closed_form_mc, samples, rng());
    auto s2 = mean_estimate(draws);
    VarianceReport rep{s1, Sigma2Result{s2, {}, 0, Sigma2Method::closed_form_mc}};
    return rep.total();
}

}  // namespace smclab

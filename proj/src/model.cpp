#include "smclab/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "smclab/errors.hpp"
#include "smclab/quadrature.hpp"

namespace smclab {

namespace {

ScalarFn scalar_of(const ExpPoly& p) {
    return [p](Point x) { return p(x[0]); };
}

}  // namespace

TestFunction::TestFunction(ExpPoly p) : eval(scalar_of(p)), closed(std::move(p)) {}

TestFunction::TestFunction(ScalarFn fn) : eval(std::move(fn)) {}

TestFunction TestFunction::operator*(const TestFunction& o) const {
    if (closed && o.closed) return TestFunction(*closed * *o.closed);
    auto a = eval, b = o.eval;
    return TestFunction(ScalarFn([a, b](Point x) { return a(x) * b(x); }));
}

TestFunction TestFunction::operator-(const TestFunction& o) const {
    if (closed && o.closed) return TestFunction(*closed - *o.closed);
    auto a = eval, b = o.eval;
    return TestFunction(ScalarFn([a, b](Point x) { return a(x) - b(x); }));
}

TestFunction TestFunction::operator*(double s) const {
    if (closed) return TestFunction(*closed * s);
    auto a = eval;
    return TestFunction(ScalarFn([a, s](Point x) { return s * a(x); }));
}

TestFunction TestFunction::shifted(double c) const {
    if (closed) return TestFunction(*closed + ExpPoly::constant(c));
    auto a = eval;
    return TestFunction(ScalarFn([a, c](Point x) { return a(x) + c; }));
}

TestFunction KernelSpec::apply(const TestFunction& h) const {
    if (uniform_increment && h.closed)
        return TestFunction(h.closed->shift_average(uniform_increment->first, uniform_increment->second));
    if (!integrate) throw NotImplemented("kernel has neither a closed form nor a quadrature rule");
    auto integ = integrate;
    auto fn = h.eval;
    return TestFunction(ScalarFn([integ, fn](Point x) { return integ(fn, x); }));
}

Model::Model(std::string name, std::size_t dim, InitialLaw initial, KernelSpec kernel,
             std::function<PotentialSpec(int)> potential, TestFunction f)
    : name_(std::move(name)),
      dim_(dim),
      initial_(std::move(initial)),
      kernel_(std::move(kernel)),
      potential_(std::move(potential)),
      f_(std::move(f)) {
    if (dim_ == 0) throw InvalidModel("model dimension must be positive");
    if (!initial_.sample) throw InvalidModel("initial law needs a sampler");
    if (!kernel_.sample) throw InvalidModel("kernel needs a sampler");
    if (!potential_) throw InvalidModel("model needs a potential");
    if (!f_.eval) throw InvalidModel("model needs a test function");
}

namespace {

InitialLaw uniform_law(double lo, double hi) {
    InitialLaw law;
    law.sample = [lo, hi](std::span<double> out, CounterRng& rng) { out[0] = lo + (hi - lo) * uniform01(rng); };
    law.integrate = [lo, hi](const ScalarFn& h) {
        return integrate_gl64([&](double x) { return h(Point(&x, 1)); }, lo, hi) / (hi - lo);
    };
    law.uniform = std::make_pair(lo, hi);
    return law;
}

KernelSpec uniform_increment_kernel(double lo, double hi) {
    KernelSpec k;
    k.sample = [lo, hi](Point from, std::span<double> to, CounterRng& rng) {
        to[0] = from[0] + lo + (hi - lo) * uniform01(rng);
    };
    k.integrate = [lo, hi](const ScalarFn& h, Point x) {
        const double x0 = x[0];
        return integrate_gl64([&](double t) { return h(Point(&t, 1)); }, x0 + lo, x0 + hi) / (hi - lo);
    };
    k.uniform_increment = std::make_pair(lo, hi);
    return k;
}

std::pair<double, double> scan_bounds(const ExpPoly& g, double lo, double hi) {
    constexpr int grid = 4096;
    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
    for (int i = 0; i <= grid; ++i) {
        const double x = (i == grid) ? hi : lo + (hi - lo) * i / grid;
        const double v = g(x);
        if (!std::isfinite(v)) throw InvalidModel("potential is not finite on its support");
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    if (!(mn > 0.0)) throw InvalidModel("potential must be strictly positive on its support");
    return {mn, mx};
}

}  // namespace

Model Model::exp_uniform() {
    auto potential = [](int n) {
        if (n < 0) throw InvalidArgument("step index must be non-negative");
        return PotentialSpec{TestFunction(ExpPoly::exponential(1.0)), 1.0, std::exp(n + 1.0)};
    };
    return Model("exp-uniform", 1, uniform_law(0.0, 1.0), uniform_increment_kernel(0.0, 1.0), potential,
                 TestFunction(ExpPoly::exponential(1.0)));
}

Model Model::custom(const ExpPolySpec& spec) {
    if (!(spec.init_hi > spec.init_lo)) throw InvalidModel("initial law needs init_hi > init_lo");
    if (!(spec.step_hi > spec.step_lo)) throw InvalidModel("kernel needs step_hi > step_lo");
    if (spec.potential.terms().empty()) throw InvalidModel("potential has no terms");
    if (spec.potential_bounds) {
        const auto [lo, hi] = *spec.potential_bounds;
        if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) throw InvalidModel("declared potential bounds are invalid");
    }
    constexpr int cached_steps = 16;
    auto table = std::make_shared<std::vector<PotentialSpec>>();
    auto make = [spec](int n) {
        if (n < 0) throw InvalidArgument("step index must be non-negative");
        const double lo = spec.init_lo + n * spec.step_lo, hi = spec.init_hi + n * spec.step_hi;
        const auto scanned = scan_bounds(spec.potential, lo, hi);
        auto bounds = scanned;
        if (spec.potential_bounds) {
            bounds = *spec.potential_bounds;
            if (scanned.first < bounds.first || scanned.second > bounds.second)
                throw InvalidModel("potential leaves its declared bounds on the reachable support");
        }
        return PotentialSpec{TestFunction(spec.potential), bounds.first, bounds.second};
    };
    for (int n = 0; n < cached_steps; ++n) table->push_back(make(n));
    auto potential = [table, make](int n) {
        if (n >= 0 && n < static_cast<int>(table->size())) return (*table)[n];
        return make(n);
    };
    return Model("custom", 1, uniform_law(spec.init_lo, spec.init_hi), uniform_increment_kernel(spec.step_lo, spec.step_hi),
                 potential, TestFunction(spec.test_function));
}

PotentialSpec Model::potential(int n) const { return potential_(n); }

std::optional<std::pair<double, double>> Model::support(int n) const {
    if (dim_ != 1 || !initial_.uniform || !kernel_.uniform_increment) return std::nullopt;
    return std::make_pair(initial_.uniform->first + n * kernel_.uniform_increment->first,
                          initial_.uniform->second + n * kernel_.uniform_increment->second);
}

double Model::initial_integral(const TestFunction& h) const {
    if (initial_.uniform && h.closed) {
        const auto [lo, hi] = *initial_.uniform;
        return h.closed->integral(lo, hi) / (hi - lo);
    }
    if (!initial_.integrate) throw NotImplemented("initial law has neither a closed form nor a quadrature rule");
    return initial_.integrate(h.eval);
}

double Model::feynman_kac_numerator(int n, const TestFunction& h) const {
    if (n < 0) throw InvalidArgument("step index must be non-negative");
    TestFunction phi = h;
    for (int p = n - 1; p >= 0; --p) phi = potential(p).fn * kernel_.apply(phi);
    return initial_integral(phi);
}

double Model::eta_bar(int n, const TestFunction& h) const {
    return feynman_kac_numerator(n, h) / feynman_kac_numerator(n, TestFunction(ExpPoly::constant(1.0)));
}

double Model::eta_tilde(int n, const TestFunction& h) const {
    if (n < 1) throw InvalidArgument("eta_tilde needs n >= 1");
    const auto g = potential(n - 1).fn;
    return eta_bar(n - 1, g * h) / eta_bar(n - 1, g);
}

PotentialSpec Model::normalized_potential(int n) const {
    auto g = potential(n);
    const double c = eta_bar(n, g.fn);
    return PotentialSpec{g.fn * (1.0 / c), g.lower / c, g.upper / c};
}

ReferenceConstants reference_constants(const Model& model) {
    if (model.dim() != 1) throw NotImplemented("reference constants need a one-dimensional model");
    const auto& f = model.test_function();
    const auto g0 = model.potential(0).fn, g1 = model.potential(1).fn, g2 = model.potential(2).fn;
    ReferenceConstants c{};
    c.eta_bar0_g0 = model.eta_bar(0, g0);
    c.eta_bar1_g1 = model.eta_bar(1, g1);
    c.eta_bar2_g2 = model.eta_bar(2, g2);
    c.eta_bar0_g0f = model.eta_bar(0, g0 * f);
    c.eta_bar1_g1f = model.eta_bar(1, g1 * f);
    c.eta_tilde1_f = model.eta_tilde(1, f);
    c.eta_bar1_x = model.eta_bar(1, TestFunction(ExpPoly::monomial(1)));
    return c;
}

void evaluate_potentials(ParticleSystem& ps, const Model& model) {
    const auto g = model.potential(ps.generation);
    const std::size_t n = ps.size();
    ps.potentials.resize(n);
    const double lo = g.lower * (1.0 - 1e-9), hi = g.upper * (1.0 + 1e-9);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = g(ps.position(i));
        if (!(v >= lo && v <= hi)) throw InvalidModel("potential value outside its declared bounds");
        ps.potentials[i] = v;
    }
}

ParticleSystem sample_initial(const Model& model, std::size_t particles, CounterRng& rng) {
    if (particles == 0) throw InvalidArgument("population size must be positive");
    ParticleSystem ps;
    ps.dim = model.dim();
    ps.generation = 0;
    ps.positions.resize(particles * ps.dim);
    for (std::size_t i = 0; i < particles; ++i)
        model.initial().sample(std::span<double>(ps.positions.data() + i * ps.dim, ps.dim), rng);
    evaluate_potentials(ps, model);
    return ps;
}

ParticleSystem mutate(const ParticleSystem& selected, const Model& model, CounterRng& rng) {
    ParticleSystem out;
    out.dim = selected.dim;
    out.generation = selected.generation + 1;
    out.positions.resize(selected.positions.size());
    const std::size_t n = selected.size();
    for (std::size_t i = 0; i < n; ++i)
        model.kernel().sample(selected.position(i), std::span<double>(out.positions.data() + i * out.dim, out.dim), rng);
    evaluate_potentials(out, model);
    return out;
}

std::vector<double> evaluate(const TestFunction& f, const ParticleSystem& ps) {
    std::vector<double> out(ps.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(ps.position(i));
    return out;
}

}  // namespace smclab

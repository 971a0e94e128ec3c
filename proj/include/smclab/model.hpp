#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "smclab/exp_poly.hpp"
#include "smclab/rng.hpp"

namespace smclab {

using Point = std::span<const double>;
using ScalarFn = std::function<double(Point)>;

// A real function on the state space. One-dimensional functions built from an
// ExpPoly keep their closed form so that reference integrals stay exact.
struct TestFunction {
    ScalarFn eval;
    std::optional<ExpPoly> closed;

    TestFunction() = default;
    TestFunction(ExpPoly p);
    TestFunction(ScalarFn fn);

    double operator()(Point x) const { return eval(x); }
    double operator()(double x) const { return eval(Point(&x, 1)); }

    TestFunction operator*(const TestFunction& o) const;
    TestFunction operator-(const TestFunction& o) const;
    TestFunction operator*(double s) const;
    TestFunction shifted(double c) const;  // this + c
};

// Potential g_n with bounds valid on the reachable support at step n.
struct PotentialSpec {
    TestFunction fn;
    double lower = 1.0;
    double upper = 1.0;

    double ratio() const { return upper / lower; }
    double operator()(Point x) const { return fn(x); }
    double operator()(double x) const { return fn(x); }
};

struct InitialLaw {
    std::function<void(std::span<double>, CounterRng&)> sample;
    std::function<double(const ScalarFn&)> integrate;  // empty when no quadrature is available
    std::optional<std::pair<double, double>> uniform;  // d = 1: U(lo, hi)
};

struct KernelSpec {
    std::function<void(Point, std::span<double>, CounterRng&)> sample;
    std::function<double(const ScalarFn&, Point)> integrate;  // empty when no quadrature is available
    std::optional<std::pair<double, double>> uniform_increment;  // d = 1: U[x + lo, x + hi]

    // P h as a function of the starting point. Exact when both the kernel and h
    // have closed forms, otherwise a quadrature wrapper.
    TestFunction apply(const TestFunction& h) const;
};

struct ParticleSystem {
    std::size_t dim = 1;
    int generation = 0;
    std::vector<double> positions;   // size() * dim values, particle-major
    std::vector<double> potentials;  // g_generation at each particle

    std::size_t size() const { return dim == 0 ? 0 : positions.size() / dim; }
    Point position(std::size_t i) const { return Point(positions.data() + i * dim, dim); }
};

class Model {
public:
    Model(std::string name, std::size_t dim, InitialLaw initial, KernelSpec kernel,
          std::function<PotentialSpec(int)> potential, TestFunction f);

    // eta = U(0,1), P(x, .) = U[x, x+1], g_n = f = exp on the reachable support [0, n+1].
    static Model exp_uniform();

    struct ExpPolySpec {
        double init_lo = 0.0, init_hi = 1.0;
        double step_lo = 0.0, step_hi = 1.0;
        ExpPoly potential;
        ExpPoly test_function;
        std::optional<std::pair<double, double>> potential_bounds;  // declared; otherwise scanned
    };
    // One-dimensional model with uniform initial law and uniform increments.
    static Model custom(const ExpPolySpec& spec);

    const std::string& name() const { return name_; }
    std::size_t dim() const { return dim_; }
    const InitialLaw& initial() const { return initial_; }
    const KernelSpec& kernel() const { return kernel_; }
    PotentialSpec potential(int n) const;
    const TestFunction& test_function() const { return f_; }

    // Reachable support [lo, hi] at step n, for one-dimensional uniform models.
    std::optional<std::pair<double, double>> support(int n) const;

    // Unnormalized E[h(Z_n) prod_{p<n} g_p(Z_p)] for the Markov chain Z.
    double feynman_kac_numerator(int n, const TestFunction& h) const;
    // Law of the mutated particles at step n, in the large-population limit.
    double eta_bar(int n, const TestFunction& h) const;
    // Law of the selected particles at step n >= 1.
    double eta_tilde(int n, const TestFunction& h) const;
    // g_n / eta_bar_n(g_n), with rescaled bounds.
    PotentialSpec normalized_potential(int n) const;

    double initial_integral(const TestFunction& h) const;

private:
    std::string name_;
    std::size_t dim_;
    InitialLaw initial_;
    KernelSpec kernel_;
    std::function<PotentialSpec(int)> potential_;
    TestFunction f_;
};

struct ReferenceConstants {
    double eta_bar0_g0;     // eta(g_0)
    double eta_bar1_g1;
    double eta_bar2_g2;
    double eta_bar0_g0f;    // eta(g_0 f)
    double eta_bar1_g1f;
    double eta_tilde1_f;
    double eta_bar1_x;      // mean of X_1
};

ReferenceConstants reference_constants(const Model& model);

ParticleSystem sample_initial(const Model& model, std::size_t particles, CounterRng& rng);

// Moves every particle through the kernel; the generation index advances and the
// potential cache is refreshed with the next potential.
ParticleSystem mutate(const ParticleSystem& selected, const Model& model, CounterRng& rng);

void evaluate_potentials(ParticleSystem& ps, const Model& model);

std::vector<double> evaluate(const TestFunction& f, const ParticleSystem& ps);

}  // namespace smclab

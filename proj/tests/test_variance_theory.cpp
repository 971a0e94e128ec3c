#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "smclab/errors.hpp"
#include "smclab/particle_filter.hpp"
#include "smclab/resampling.hpp"
#include "smclab/variance_theory.hpp"

using namespace smclab;

namespace {

const double e = std::numbers::e;

double overlap(double a, double b, double c, double d) { return std::max(0.0, std::min(b, d) - std::max(a, c)); }

// y - sum_m |(m-1,m] cap (x, x+y]|^2
double beta0_oracle(double x, double y) {
    double s = 0.0;
    for (int m = 1; m <= static_cast<int>(x + y) + 2; ++m) {
        const double q = overlap(m - 1, m, x, x + y);
        s += q * q;
    }
    return y - s;
}

// 2 sum_m |I_m cap (x, x+y1]| |I_m cap (x+y1+y2, x+y1+y2+y3]|
double beta1_oracle(double x, double y1, double y2, double y3) {
    double s = 0.0;
    const double c = x + y1 + y2;
    for (int m = 1; m <= static_cast<int>(c + y3) + 2; ++m)
        s += overlap(m - 1, m, x, x + y1) * overlap(m - 1, m, c, c + y3);
    return 2.0 * s;
}

double kronrod(std::size_t k, const std::vector<double>& y) {
    auto fn = [&](double u) { return bar_beta(k, u, y); };
    // split where u plus a partial weight sum crosses an integer
    std::vector<double> shifts = {y[0]};
    if (k >= 1) {
        double mid = 0.0;
        for (std::size_t l = 1; l < k; ++l) mid += y[l];
        shifts.push_back(y[0] + mid);
        shifts.push_back(y[0] + mid + y[k]);
    }
    std::vector<double> cuts = {0.0, 1.0};
    for (double c : shifts) cuts.push_back(std::ceil(c) - c);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        if (cuts[i + 1] > cuts[i])
            total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(fn, cuts[i], cuts[i + 1], 15, 1e-14);
    return total;
}

}  // namespace

TEST_CASE("beta functions at hand-computed points") {
    CHECK(beta0(0.0, 0.3) == doctest::Approx(0.3 * 0.7));
    CHECK(beta0(0.25, 0.0) == doctest::Approx(0.0));
    CHECK(beta0(0.4, 0.6) == doctest::Approx(0.4 * 0.6));
    CHECK(beta0(0.2, 0.5) == doctest::Approx(0.5 - 0.25));
    CHECK(beta1(0.0, 0.5, 0.0, 0.5) == doctest::Approx(2.0 * 0.25));
    CHECK(beta1(0.3, 0.2, 1.0, 0.4) == doctest::Approx(0.0));
    CHECK(beta1(0.9, 0.5, 0.1, 0.2) == doctest::Approx(beta1_oracle(0.9, 0.5, 0.1, 0.2)));
}

TEST_CASE("beta functions equal their overlap-sum definitions") {
    CounterRng rng(21);
    for (int i = 0; i < 20000; ++i) {
        const double x = uniform01(rng), y1 = 3 * uniform01(rng), y2 = 2 * uniform01(rng), y3 = 3 * uniform01(rng);
        CHECK(std::abs(beta0(x, y1) - beta0_oracle(x, y1)) < 1e-12);
        CHECK(std::abs(beta1(x, y1, y2, y3) - beta1_oracle(x, y1, y2, y3)) < 1e-12);
        CHECK(beta0(x, y1) >= -1e-15);
        CHECK(beta1(x, y1, y2, y3) >= -1e-15);
    }
}

TEST_CASE("clamping") {
    CHECK(beta0(-0.5, 0.3, true) == doctest::Approx(beta0(0.0, 0.3)));
    CHECK(beta0(1.5, -0.3, true) == doctest::Approx(beta0(1.0, 0.0)));
    CHECK(beta1(0.2, -1.0, 0.1, 0.3, true) == doctest::Approx(beta1(0.2, 0.0, 0.1, 0.3)));
}

TEST_CASE("piecewise integration agrees with adaptive Gauss-Kronrod") {
    CounterRng rng(22);
    for (int rep = 0; rep < 100; ++rep) {
        for (std::size_t k = 0; k <= 3; ++k) {
            std::vector<double> y(k + 1);
            for (auto& v : y) v = 1.0 / e + (e - 1.0 / e) * uniform01(rng) * 0.6;
            CHECK(integrate_bar_beta(k, y) == doctest::Approx(kronrod(k, y)).epsilon(1e-9));
        }
    }
}

TEST_CASE("closed-form phi_k equals the integral of bar beta") {
    CounterRng rng(23);
    for (int rep = 0; rep < 200; ++rep) {
        for (std::size_t k = 0; k <= 3; ++k) {
            std::vector<double> y(k + 1);
            for (auto& v : y) v = 0.05 + 1.2 * uniform01(rng);
            const double f0 = 2 * uniform01(rng) - 1, fk = k == 0 ? f0 : 2 * uniform01(rng) - 1;
            CHECK(std::abs(phi_k_closed(k, f0, fk, y) - f0 * fk * integrate_bar_beta(k, y)) < 1e-9);
        }
    }
}

TEST_CASE("integral of beta_0 over a grid of weights") {
    for (int i = 0; i < 100; ++i) {
        const double y = 3.0 * i / 99.0;
        const double want = (1.0 - (y < 1.0 ? std::pow(1.0 - y, 3) : 0.0)) / 3.0;
        const std::vector<double> yy = {y};
        CHECK(std::abs(integrate_bar_beta(0, yy) - want) < 1e-12);
        CHECK(std::abs(kronrod(0, yy) - want) < 1e-10);
    }
}

TEST_CASE("phi_n") {
    CHECK(phi_n(e, 0) == 3);
    CHECK(phi_n(e * e, 0) == 8);
    CHECK(phi_n(e, 8) == 25);
    CHECK(phi_n(1.0, 0) == 1);
    CHECK_THROWS_AS(phi_n(0.5, 0), InvalidArgument);
    const auto m = Model::exp_uniform();
    CHECK(phi_n(m, 0, 0) == 3);
    CHECK(phi_n(m, 1, 0) == 8);
}

TEST_CASE("psi counts joint stratum overlaps") {
    CounterRng rng(24);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t M = 20;
        std::vector<double> g(M);
        for (auto& v : g) v = 1.0 + (e - 1.0) * uniform01(rng);
        const auto p = weight_profile(g);
        const auto dense = selection_coefficients(p).dense();
        const std::size_t j = 3 + static_cast<std::size_t>(uniform01(rng) * 5);
        const std::vector<std::size_t> s = {1, 3};
        // sum over strata m of q_{m,j} q_{m+1,j+1} q_{m+2,j+3}, strata shifted by floor(S_{j})
        double want = 0.0;
        for (std::size_t m = 0; m + 2 < M; ++m)
            want += dense[m * M + j] * dense[(m + 1) * M + j + 1] * dense[(m + 2) * M + j + 3];
        const std::vector<double> y(p.weights.begin() + j, p.weights.begin() + j + 4);
        const double got = psi(s, p.frac[j], y, M);
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }
    const std::vector<double> y = {0.7};
    CHECK(psi(std::vector<std::size_t>{}, 0.6, y, 5) == doctest::Approx(0.7));
    CHECK_THROWS_AS(psi(std::vector<std::size_t>{2, 1}, 0.1, std::vector<double>{1, 1, 1}, 3), InvalidArgument);
}

TEST_CASE("sigma_1^2 on the worked model") {
    const auto m = Model::exp_uniform();
    const auto s1 = sigma1_sq(m, m.test_function());
    CHECK(s1.kind == EstimateKind::exact);
    CHECK(s1.point == doctest::Approx(0.2662106707887794).epsilon(1e-13));
    const double a = e - 1, b = (e * e - 1) / 2;
    const double eta_f0sq = a * a * (std::pow(e, 4) - 1) / 4 + b * b * (e * e - 1) / 2 - 2 * a * b * (std::pow(e, 3) - 1) / 3;
    CHECK(s1.point == doctest::Approx(eta_f0sq / std::pow(a, 4)).epsilon(1e-13));
}

TEST_CASE("sigma_2^2 estimators") {
    const auto m = Model::exp_uniform();
    CounterRng rng(25);
    const auto closed = sigma2_sq(m, m.test_function(), Sigma2Method::closed_form_mc, 100000, rng);
    const auto direct = sigma2_sq(m, m.test_function(), Sigma2Method::beta_mc, 100000, rng);
    CHECK(closed.lags == 3);
    CHECK(closed.per_k.size() == 4);
    CHECK(std::abs(closed.total.point - direct.total.point) < 3.0 * (closed.total.half_width() + direct.total.half_width()));
    // integrating u out can only reduce the per-sample spread
    CHECK(closed.total.half_width() < direct.total.half_width());
    CHECK(std::abs(closed.total.point - 0.0793412) < 3.0 * closed.total.half_width());
    double sum = 0.0;
    for (const auto& k : closed.per_k) sum += k.point;
    CHECK(sum == doctest::Approx(closed.total.point).epsilon(1e-12));

    const TestFunction zero(ExpPoly::constant(0.0));
    const auto z = sigma2_sq(m, zero, Sigma2Method::closed_form_mc, 1000, rng);
    CHECK(z.total.point == 0.0);
    CHECK(z.total.half_width() == 0.0);
}

TEST_CASE("expected exact conditional variance approaches sigma_2^2") {
    const auto m = Model::exp_uniform();
    const auto& f = m.test_function();
    const std::size_t M = 10000;
    std::vector<double> draws;
    for (std::uint64_t r = 0; r < 200; ++r) {
        CounterRng rng(derive_key(26, {purpose::population, r}));
        const auto ps = sample_initial(m, M, rng);
        const auto fv = evaluate(f, ps);
        draws.push_back(conditional_variance_exact(weight_profile(ps), fv));
    }
    const auto sim = mean_estimate(draws);
    CounterRng rng(27);
    const auto theory = sigma2_sq(m, f, Sigma2Method::closed_form_mc, 200000, rng).total;
    CHECK(std::abs(sim.point - theory.point) < 3.0 * (sim.half_width() + theory.half_width()));
}

TEST_CASE("bar f sums the closed-form lag terms") {
    const auto m = Model::exp_uniform();
    const auto g = m.normalized_potential(1);
    const auto bar = build_bar_f_n(m.test_function(), g, g.ratio());
    CHECK(bar.arity() == 9);
    std::vector<double> x(9);
    for (std::size_t i = 0; i < 9; ++i) x[i] = 0.2 * static_cast<double>(i) / 9.0 + 0.9;
    double want = 0.0;
    std::vector<double> gv(9);
    for (std::size_t i = 0; i < 9; ++i) gv[i] = g(x[i]);
    for (std::size_t k = 0; k < 9; ++k)
        want += std::exp(x[0]) * std::exp(x[k]) * integrate_bar_beta(k, std::span<const double>(gv.data(), k + 1));
    CHECK(bar(x) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("centred and transformed test functions on the worked model") {
    const auto m = Model::exp_uniform();
    const auto& f = m.test_function();
    const double a1 = (e * e - 1) / 2, b1 = (e * e * e - 1) * (e + 1) / 6;
    const auto f1 = centred_test_function(m, 1, f);
    CHECK(m.eta_bar(1, f1) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    const auto pf = transformed_test_function(m, 1, f);
    for (double x : {0.0, 0.3, 0.9}) {
        const double want = a1 * (std::exp(2 * (x + 1)) - std::exp(2 * x)) / 2 - b1 * (std::exp(x + 1) - std::exp(x));
        CHECK(pf(x) == doctest::Approx(want).epsilon(1e-12));
    }
    // eta_tilde_1(P f_1^2 - (P f_1)^2) written out term by term
    const double corr = a1 * a1 * ((std::pow(e, 5) - 1) / 5) * ((e * e - 1) / 2) +
                        b1 * b1 * ((std::pow(e, 3) - 1) / 3) * ((e * e - 1) / 2 - (e - 1) * (e - 1)) -
                        a1 * b1 * ((std::pow(e, 4) - 1) / 4) * (2 * (std::pow(e, 3) - 1) / 3 - (e * e - 1) * (e - 1));
    CHECK(mutation_variance_term(m, 1, f) == doctest::Approx(corr / (e - 1) / std::pow(a1, 4)).epsilon(1e-11));
}

TEST_CASE("one step of the variance recursion") {
    const auto m = Model::exp_uniform();
    const auto& f = m.test_function();
    const auto pf = transformed_test_function(m, 1, f);
    const auto v1 = first_selection_variance(m, pf, 200000, 31);
    const auto terms = recursive_variance_step(m, 1, f, v1.point, 200, 1000, 32);
    const double a1 = (e * e - 1) / 2;
    CHECK(terms.propagated == doctest::Approx(v1.point / std::pow(a1, 4)));
    // first two terms against the published 2.7933
    const double two_terms = terms.propagated + terms.mutation;
    CHECK(std::abs(two_terms - 2.7933) < 3.0 * (v1.half_width() / std::pow(a1, 4) + 0.0101 / 1.96));
    // selection term against the published 0.4725
    CHECK(std::abs(terms.selection.point - 0.4725) < 3.0 * terms.selection.half_width() + 0.02);
    CHECK(terms.total.point == doctest::Approx(two_terms + terms.selection.point));
    CHECK_THROWS_AS(recursive_variance_step(m, 0, f, 1.0, 10, 100, 1), InvalidArgument);
}

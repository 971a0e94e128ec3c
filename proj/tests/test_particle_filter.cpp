#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "smclab/errors.hpp"
#include "smclab/estimators.hpp"
#include "smclab/particle_filter.hpp"

using namespace smclab;

TEST_CASE("runs are a pure function of the seed") {
    const auto m = Model::exp_uniform();
    const auto a = run_filter(m, 200, 3, 99);
    const auto b = run_filter(m, 200, 3, 99);
    const auto c = run_filter(m, 200, 3, 100);
    REQUIRE(a.records.size() == 4);
    for (int n = 0; n <= 3; ++n) {
        CHECK(a.at(n).mutated.positions == b.at(n).mutated.positions);
        CHECK(a.at(n).ancestors == b.at(n).ancestors);
    }
    CHECK(a.at(3).mutated.positions != c.at(3).mutated.positions);
}

TEST_CASE("trajectory structure") {
    const auto m = Model::exp_uniform();
    const auto t = run_filter(m, 64, 2, 5);
    CHECK(t.at(0).selected.positions == t.at(0).mutated.positions);
    CHECK(t.at(0).ancestors.empty());
    for (int n = 1; n <= 2; ++n) {
        const auto& prev = t.at(n - 1);
        const auto& rec = t.at(n);
        CHECK(rec.selected.generation == n - 1);
        CHECK(rec.mutated.generation == n);
        CHECK(std::is_sorted(rec.ancestors.begin(), rec.ancestors.end()));
        for (std::size_t i = 0; i < 64; ++i) {
            CHECK(rec.selected.positions[i] == prev.mutated.positions[rec.ancestors[i]]);
            CHECK(rec.mutated.positions[i] >= rec.selected.positions[i]);
            CHECK(rec.mutated.positions[i] <= rec.selected.positions[i] + 1.0);
            CHECK(rec.mutated.positions[i] <= n + 1.0);
        }
        CHECK(rec.profile.partial_sums.back() == 64.0);
    }
    const auto last_only = run_filter(m, 64, 2, 5, {Scheme::stratified, false});
    REQUIRE(last_only.records.size() == 1);
    CHECK(last_only.last().mutated.positions == t.at(2).mutated.positions);
    CHECK_THROWS_AS(last_only.at(1), InvalidArgument);
    CHECK_THROWS_AS(run_filter(m, 0, 1, 1), InvalidArgument);
}

TEST_CASE("particle means converge to the limiting flow") {
    const auto m = Model::exp_uniform();
    std::vector<double> mean_x1, mean_fy1;
    for (std::uint64_t r = 0; r < 200; ++r) {
        const auto t = run_filter(m, 500, 1, 1000 + r);
        double sx = 0.0, sf = 0.0;
        for (std::size_t i = 0; i < 500; ++i) {
            sx += t.at(1).mutated.positions[i];
            sf += std::exp(t.at(1).selected.positions[i]);
        }
        mean_x1.push_back(sx / 500);
        mean_fy1.push_back(sf / 500);
    }
    const auto ex = mean_estimate(mean_x1);
    const auto ef = mean_estimate(mean_fy1);
    CHECK(std::abs(ex.point - m.eta_bar(1, TestFunction(ExpPoly::monomial(1)))) < 4.0 * ex.half_width() + 1e-3);
    CHECK(std::abs(ef.point - m.eta_tilde(1, m.test_function())) < 4.0 * ef.half_width() + 1e-3);
}

TEST_CASE("window sums") {
    const auto m = Model::exp_uniform();
    const auto t = run_filter(m, 100, 1, 7);
    const WindowFn one = [](std::span<const double>) { return 1.0; };
    CHECK(k_tuple_mean(t, 1, 0, one) == doctest::Approx(1.0));
    CHECK(k_tuple_mean(t, 1, 3, one) == doctest::Approx(0.97));
    const PsiFn unit = [](double, std::span<const double>) { return 1.0; };
    CHECK(conjecture2_lhs(t, 1, 2, one, unit) == doctest::Approx(0.98));
    CounterRng rng(1);
    CHECK(conjecture2_rhs(t, m, 1, 2, one, unit, rng) == doctest::Approx(0.98));

    const WindowFn first = [](std::span<const double> x) { return x[0]; };
    double s = 0.0;
    for (std::size_t i = 0; i + 2 < 100; ++i) s += t.at(1).mutated.positions[i];
    CHECK(k_tuple_mean(t, 1, 2, first) == doctest::Approx(s / 100));
    CHECK_THROWS_AS(k_tuple_mean(t, 1, 100, one), InvalidArgument);
}

TEST_CASE("conjecture 2 sums see the right weights") {
    const auto m = Model::exp_uniform();
    const auto t = run_filter(m, 50, 1, 8);
    const auto& rec = t.at(1);
    const WindowFn one = [](std::span<const double>) { return 1.0; };
    const PsiFn u_only = [](double u, std::span<const double>) { return u; };
    const PsiFn w_sum = [](double, std::span<const double> w) { return w[0] + w[1]; };
    double su = 0.0, sw = 0.0;
    for (std::size_t i = 0; i + 1 < 50; ++i) {
        su += rec.profile.frac[i];
        sw += rec.profile.weights[i] + rec.profile.weights[i + 1];
    }
    CHECK(conjecture2_lhs(t, 1, 1, one, u_only) == doctest::Approx(su / 50));
    CHECK(conjecture2_lhs(t, 1, 1, one, w_sum) == doctest::Approx(sw / 50));
    const double c = m.eta_bar(1, m.potential(1).fn);
    double sg = 0.0;
    for (std::size_t i = 0; i + 1 < 50; ++i) sg += (rec.mutated.potentials[i] + rec.mutated.potentials[i + 1]) / c;
    CounterRng rng(2);
    CHECK(conjecture2_rhs(t, m, 1, 1, one, w_sum, rng) == doctest::Approx(sg / 50));
}

TEST_CASE("trajectory CSV export") {
    const auto m = Model::exp_uniform();
    const auto t = run_filter(m, 10, 2, 3);
    std::ostringstream out;
    write_trajectory_csv(t, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "step,index,y_position,x_position,weight");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 30);
}

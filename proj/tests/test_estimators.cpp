#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "smclab/errors.hpp"
#include "smclab/estimators.hpp"
#include "smclab/rng.hpp"

using namespace smclab;

namespace {

std::vector<double> normal_draws(std::uint64_t seed, std::size_t n, double mu = 0.0, double sd = 1.0) {
    CounterRng rng(seed);
    std::normal_distribution<double> law(mu, sd);
    std::vector<double> x(n);
    for (auto& v : x) v = law(rng);
    return x;
}

}  // namespace

TEST_CASE("mean and variance estimates on a fixed sample") {
    const std::vector<double> x = {1.0, 2.0, 4.0, 7.0};
    const auto m = mean_estimate(x);
    CHECK(m.point == doctest::Approx(3.5));
    const double m2 = (6.25 + 2.25 + 0.25 + 12.25) / 4;
    CHECK(m.half_width() == doctest::Approx(1.96 * std::sqrt(m2) / 2));
    const auto v = variance_estimate(x);
    CHECK(v.point == doctest::Approx(m2));
    const double m4 = (std::pow(2.5, 4) + std::pow(1.5, 4) + std::pow(0.5, 4) + std::pow(3.5, 4)) / 4;
    CHECK(v.half_width() == doctest::Approx(1.96 / 2 * std::sqrt(m4 - m2 * m2)));
    CHECK(v.kind == EstimateKind::variance);
    CHECK_THROWS_AS(mean_estimate(std::vector<double>{1.0}), InvalidArgument);
}

TEST_CASE("normal quantiles") {
    CHECK(normal_quantile_two_sided(0.95) == 1.96);
    CHECK(normal_quantile_two_sided(0.90) == doctest::Approx(1.644853627).epsilon(1e-9));
    CHECK_THROWS_AS(normal_quantile_two_sided(1.0), InvalidArgument);
}

TEST_CASE("pairwise sums are accurate") {
    std::vector<double> x(100001, 0.1);
    x[0] = 1e10;
    CHECK(pairwise_sum(x) == doctest::Approx(1e10 + 10000.0).epsilon(1e-15));
}

TEST_CASE("interval widths shrink like one over root n") {
    const auto a = mean_estimate(normal_draws(1, 1000));
    const auto b = mean_estimate(normal_draws(2, 100000));
    CHECK(a.half_width() / b.half_width() == doctest::Approx(10.0).epsilon(0.05));
    const auto c = variance_estimate(normal_draws(3, 1000));
    const auto d = variance_estimate(normal_draws(4, 100000));
    CHECK(c.half_width() / d.half_width() == doctest::Approx(10.0).epsilon(0.15));
}

TEST_CASE("coverage of the 95% intervals") {
    int mean_hits = 0, var_hits = 0;
    const int reps = 400;
    for (int r = 0; r < reps; ++r) {
        const auto x = normal_draws(100 + r, 2000, 1.0, 2.0);
        mean_hits += mean_estimate(x).contains(1.0);
        var_hits += variance_estimate(x).contains(4.0);
    }
    CHECK(mean_hits >= 0.91 * reps);
    CHECK(mean_hits <= 0.99 * reps);
    CHECK(var_hits >= 0.91 * reps);
    CHECK(var_hits <= 0.99 * reps);
}

TEST_CASE("Kolmogorov-Smirnov check") {
    const auto x = normal_draws(7, 5000, 0.5, 3.0);
    const auto ok = normality_check(x, 0.5, 9.0);
    CHECK(ok.pass);
    CHECK(ok.critical == doctest::Approx(1.358 / std::sqrt(5000.0)));
    CHECK_FALSE(normality_check(x, 0.8, 9.0).pass);
    CHECK_FALSE(normality_check(x, 0.5, 16.0).pass);
    std::vector<double> uniform(5000);
    CounterRng rng(8);
    for (auto& v : uniform) v = uniform01(rng);
    CHECK_FALSE(normality_check(uniform, 0.5, 1.0 / 12.0).pass);
    CHECK_THROWS_AS(normality_check(std::vector<double>(99, 0.0), 0.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(normality_check(x, 0.0, 0.0), InvalidArgument);
}

TEST_CASE("overlap rule and interval transforms") {
    const EstimateWithCI a{1.0, 0.9, 1.1, 10, 0.95, EstimateKind::mean};
    const EstimateWithCI b{1.5, 1.4, 1.6, 10, 0.95, EstimateKind::mean};
    CHECK(overlap(a, b));
    CHECK_FALSE(overlap(a, b, 2.0));
    const auto s = a.shifted(-0.5).scaled(2.0);
    CHECK(s.point == doctest::Approx(1.0));
    CHECK(s.lo == doctest::Approx(0.8));
    CHECK(s.hi == doctest::Approx(1.2));
    CHECK(s.kind == EstimateKind::derived);
    CHECK(EstimateWithCI::exact(3.0).shifted(1.0).kind == EstimateKind::exact);
}

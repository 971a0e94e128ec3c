#include "smclab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "smclab/errors.hpp"

namespace smclab {

std::string to_string(EstimateKind k) {
    switch (k) {
        case EstimateKind::exact: return "exact";
        case EstimateKind::mean: return "mean";
        case EstimateKind::variance: return "variance";
        case EstimateKind::derived: return "derived";
    }
    return "unknown";
}

EstimateWithCI EstimateWithCI::exact(double v) { return {v, v, v, 0, 1.0, EstimateKind::exact}; }

EstimateWithCI EstimateWithCI::shifted(double c) const {
    auto e = *this;
    e.point += c;
    e.lo += c;
    e.hi += c;
    if (e.kind != EstimateKind::exact) e.kind = EstimateKind::derived;
    return e;
}

EstimateWithCI EstimateWithCI::scaled(double s) const {
    require(s > 0.0, "scale factor must be positive");
    auto e = *this;
    e.point *= s;
    e.lo *= s;
    e.hi *= s;
    if (e.kind != EstimateKind::exact) e.kind = EstimateKind::derived;
    return e;
}

double normal_quantile_two_sided(double level) {
    require(level > 0.0 && level < 1.0, "confidence level must lie in (0,1)");
    if (level == 0.95) return 1.96;
    boost::math::normal_distribution<double> n01;
    return boost::math::quantile(n01, 0.5 + 0.5 * level);
}

double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 64) {
        double s = 0.0, c = 0.0;
        for (double x : xs) {
            const double t = s + x;
            c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
            s = t;
        }
        return s + c;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

namespace {

double mean_of(std::span<const double> xs) { return pairwise_sum(xs) / static_cast<double>(xs.size()); }

double central_moment(std::span<const double> xs, double mean, int order) {
    std::vector<double> d(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double c = xs[i] - mean;
        d[i] = order == 2 ? c * c : c * c * c * c;
    }
    return pairwise_sum(d) / static_cast<double>(xs.size());
}

}  // namespace

EstimateWithCI mean_estimate(std::span<const double> xs, double level) {
    require(xs.size() >= 2, "mean_estimate needs at least two samples");
    const double z = normal_quantile_two_sided(level);
    const double m = mean_of(xs);
    const double sd = std::sqrt(central_moment(xs, m, 2));
    const double h = z * sd / std::sqrt(static_cast<double>(xs.size()));
    return {m, m - h, m + h, xs.size(), level, EstimateKind::mean};
}

EstimateWithCI variance_estimate(std::span<const double> xs, double level) {
    require(xs.size() >= 2, "variance_estimate needs at least two samples");
    const double z = normal_quantile_two_sided(level);
    const double m = mean_of(xs);
    const double m2 = central_moment(xs, m, 2);
    const double m4 = central_moment(xs, m, 4);
    const double h = z / std::sqrt(static_cast<double>(xs.size())) * std::sqrt(std::max(0.0, m4 - m2 * m2));
    return {m2, m2 - h, m2 + h, xs.size(), level, EstimateKind::variance};
}

NormalityResult normality_check(std::span<const double> xs, double mu, double sigma2, double alpha) {
    require(xs.size() >= 100, "normality_check needs at least 100 samples");
    require(sigma2 > 0.0, "normality_check needs a positive variance");
    require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
    std::vector<double> s(xs.begin(), xs.end());
    std::sort(s.begin(), s.end());
    boost::math::normal_distribution<double> law(mu, std::sqrt(sigma2));
    const double n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double F = boost::math::cdf(law, s[i]);
        d = std::max({d, (i + 1) / n - F, F - i / n});
    }
    NormalityResult r;
    r.statistic = d;
    r.n = s.size();
    const double c = alpha == 0.05 ? 1.358 : std::sqrt(-0.5 * std::log(alpha / 2.0));
    r.critical = c / std::sqrt(n);
    r.pass = d < r.critical;
    return r;
}

bool overlap(const EstimateWithCI& a, const EstimateWithCI& b, double factor) {
    return std::abs(a.point - b.point) < factor * (a.half_width() + b.half_width());
}

}  // namespace smclab

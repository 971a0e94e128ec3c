#include "smclab/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace smclab {

namespace {

GaussRule build_rule() {
    constexpr int n = 64;
    GaussRule r{};
    for (int i = 0; i < n / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = -x;
        r.weights[i] = w;
        r.nodes[n - 1 - i] = x;
        r.weights[n - 1 - i] = w;
    }
    return r;
}

}  // namespace

const GaussRule& gauss_legendre_64() {
    static const GaussRule rule = build_rule();
    return rule;
}

double integrate_gl64(const std::function<double(double)>& fn, double a, double b) {
    const auto& r = gauss_legendre_64();
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * fn(mid + half * r.nodes[i]);
    return s * half;
}

double integrate_gl64(const std::function<double(double)>& fn, double a, double b, std::size_t panels) {
    if (panels == 0) panels = 1;
    const double h = (b - a) / static_cast<double>(panels);
    double s = 0.0;
    for (std::size_t p = 0; p < panels; ++p) s += integrate_gl64(fn, a + h * p, a + h * (p + 1));
    return s;
}

}  // namespace smclab

#include "smclab/exp_poly.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "smclab/errors.hpp"

namespace smclab {

namespace {

bool is_zero_rate(double r) { return std::abs(r) < 1e-14; }

double binomial(int n, int k) {
    double b = 1.0;
    for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
    return b;
}

// Antiderivative of t^p e^{rt} written as e^{rt} * sum_j c_j t^j (r != 0),
// or t^{p+1}/(p+1) (r == 0). Returns polynomial coefficients c_0..c_deg.
std::vector<double> antiderivative_poly(int p, double r) {
    if (is_zero_rate(r)) {
        std::vector<double> c(p + 2, 0.0);
        c[p + 1] = 1.0 / (p + 1);
        return c;
    }
    std::vector<double> c(p + 1, 0.0);
    double falling = 1.0;
    double rpow = r;
    for (int j = 0; j <= p; ++j) {
        c[p - j] = (j % 2 == 0 ? 1.0 : -1.0) * falling / rpow;
        falling *= (p - j);
        rpow *= r;
    }
    return c;
}

}  // namespace

ExpPoly::ExpPoly(std::vector<Term> terms) : terms_(std::move(terms)) {
    for (const auto& t : terms_) {
        if (t.power < 0) throw InvalidArgument("ExpPoly: negative power");
        if (!std::isfinite(t.coef) || !std::isfinite(t.rate)) throw InvalidArgument("ExpPoly: non-finite term");
    }
    canonicalize();
}

ExpPoly ExpPoly::constant(double c) { return ExpPoly({{c, 0, 0.0}}); }
ExpPoly ExpPoly::exponential(double rate, double coef) { return ExpPoly({{coef, 0, rate}}); }
ExpPoly ExpPoly::monomial(int power, double coef) { return ExpPoly({{coef, power, 0.0}}); }

void ExpPoly::canonicalize() {
    std::map<std::pair<double, int>, double> acc;
    for (const auto& t : terms_) acc[{is_zero_rate(t.rate) ? 0.0 : t.rate, t.power}] += t.coef;
    terms_.clear();
    for (const auto& [key, coef] : acc)
        if (coef != 0.0) terms_.push_back({coef, key.second, key.first});
}

double ExpPoly::operator()(double x) const {
    double s = 0.0;
    for (const auto& t : terms_) {
        double v = t.coef;
        if (t.power > 0) v *= std::pow(x, t.power);
        if (t.rate != 0.0) v *= std::exp(t.rate * x);
        s += v;
    }
    return s;
}

ExpPoly ExpPoly::operator+(const ExpPoly& o) const {
    auto t = terms_;
    t.insert(t.end(), o.terms_.begin(), o.terms_.end());
    return ExpPoly(std::move(t));
}

ExpPoly ExpPoly::operator-(const ExpPoly& o) const { return *this + o * -1.0; }

ExpPoly ExpPoly::operator*(const ExpPoly& o) const {
    std::vector<Term> t;
    t.reserve(terms_.size() * o.terms_.size());
    for (const auto& a : terms_)
        for (const auto& b : o.terms_) t.push_back({a.coef * b.coef, a.power + b.power, a.rate + b.rate});
    return ExpPoly(std::move(t));
}

ExpPoly ExpPoly::operator*(double s) const {
    auto t = terms_;
    for (auto& x : t) x.coef *= s;
    return ExpPoly(std::move(t));
}

double ExpPoly::integral(double a, double b) const {
    double s = 0.0;
    for (const auto& t : terms_) {
        const auto c = antiderivative_poly(t.power, t.rate);
        auto eval = [&](double x) {
            double poly = 0.0;
            for (std::size_t j = c.size(); j-- > 0;) poly = poly * x + c[j];
            return is_zero_rate(t.rate) ? poly : poly * std::exp(t.rate * x);
        };
        s += t.coef * (eval(b) - eval(a));
    }
    return s;
}

ExpPoly ExpPoly::shift_average(double lo, double hi) const {
    if (!(hi > lo)) throw InvalidArgument("ExpPoly::shift_average: need hi > lo");
    std::vector<Term> out;
    const double scale = 1.0 / (hi - lo);
    for (const auto& t : terms_) {
        const auto c = antiderivative_poly(t.power, t.rate);
        // F(x+s) = e^{r s} e^{r x} sum_j c_j (x+s)^j
        for (double s : {hi, lo}) {
            const double sign = (s == hi) ? 1.0 : -1.0;
            const double shift_factor = is_zero_rate(t.rate) ? 1.0 : std::exp(t.rate * s);
            for (std::size_t j = 0; j < c.size(); ++j) {
                if (c[j] == 0.0) continue;
                for (int q = 0; q <= static_cast<int>(j); ++q) {
                    const double coef = sign * scale * t.coef * shift_factor * c[j] *
                                        binomial(static_cast<int>(j), q) * std::pow(s, static_cast<int>(j) - q);
                    out.push_back({coef, q, t.rate});
                }
            }
        }
    }
    return ExpPoly(std::move(out));
}

}  // namespace smclab

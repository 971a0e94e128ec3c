#pragma once

#include <vector>

namespace smclab {

// Finite sum of terms coef * x^power * exp(rate * x) on the real line.
// Closed under products, uniform-increment averaging and definite integration,
// which is what the analytic reference constants need.
class ExpPoly {
public:
    struct Term {
        double coef;
        int power;
        double rate;
    };

    ExpPoly() = default;
    explicit ExpPoly(std::vector<Term> terms);

    static ExpPoly constant(double c);
    static ExpPoly exponential(double rate, double coef = 1.0);
    static ExpPoly monomial(int power, double coef = 1.0);

    const std::vector<Term>& terms() const { return terms_; }

    double operator()(double x) const;

    ExpPoly operator+(const ExpPoly& o) const;
    ExpPoly operator-(const ExpPoly& o) const;
    ExpPoly operator*(const ExpPoly& o) const;
    ExpPoly operator*(double s) const;

    double integral(double a, double b) const;

    // x -> (1/(hi-lo)) * integral of this over [x+lo, x+hi]
    ExpPoly shift_average(double lo, double hi) const;

private:
    void canonicalize();
    std::vector<Term> terms_;
};

}  // namespace smclab

#pragma once

#include <array>
#include <cstddef>
#include <functional>

namespace smclab {

struct GaussRule {
    std::array<double, 64> nodes;    // on [-1, 1]
    std::array<double, 64> weights;
};

// 64-point Gauss-Legendre rule, computed once by Newton iteration.
const GaussRule& gauss_legendre_64();

double integrate_gl64(const std::function<double(double)>& fn, double a, double b);

// Composite rule: [a,b] split into `panels` equal pieces, 64 points each.
double integrate_gl64(const std::function<double(double)>& fn, double a, double b, std::size_t panels);

}  // namespace smclab

#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace smclab {

enum class EstimateKind { exact, mean, variance, derived };

std::string to_string(EstimateKind k);

struct EstimateWithCI {
    double point = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t n = 0;
    double level = 0.95;
    EstimateKind kind = EstimateKind::exact;

    double half_width() const { return 0.5 * (hi - lo); }
    bool contains(double x) const { return lo <= x && x <= hi; }

    static EstimateWithCI exact(double v);
    // point + c with the interval moved along
    EstimateWithCI shifted(double c) const;
    // s * estimate, s > 0
    EstimateWithCI scaled(double s) const;
};

// Two-sided normal quantile for the given confidence level; 0.95 maps to 1.96.
double normal_quantile_two_sided(double level);

// Sum with a fixed reduction tree over the buffer order.
double pairwise_sum(std::span<const double> xs);

// Sample mean with half-width z * sd / sqrt(n), sd the biased standard deviation.
EstimateWithCI mean_estimate(std::span<const double> xs, double level = 0.95);

// Biased sample variance m2 with half-width z / sqrt(n) * sqrt(m4 - m2^2).
EstimateWithCI variance_estimate(std::span<const double> xs, double level = 0.95);

struct NormalityResult {
    double statistic = 0.0;  // Kolmogorov-Smirnov D
    double critical = 0.0;   // c(alpha) / sqrt(n)
    std::size_t n = 0;
    bool pass = false;
};

// One-sample KS test against N(mu, sigma2); needs n >= 100.
NormalityResult normality_check(std::span<const double> xs, double mu, double sigma2, double alpha = 0.05);

// |a - b| < factor * (half_a + half_b)
bool overlap(const EstimateWithCI& a, const EstimateWithCI& b, double factor = 3.0);

}  // namespace smclab

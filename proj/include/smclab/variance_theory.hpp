#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "smclab/estimators.hpp"
#include "smclab/model.hpp"
#include "smclab/rng.hpp"

namespace smclab {

// beta_0(x, y) = {x+y}(1-{x+y}) + x(1-x) - 2x(1-x-y) 1{y < 1-x}
// With clamp, x is clipped to [0,1] and y to [0, inf).
double beta0(double x, double y, bool clamp = false);

// beta_1(x, y1, y2, y3) with z = {x+y1}:
// 2( z(1-z-y2)1{y2<1-z} - z(1-z-y2-y3)1{y2+y3<1-z}
//    - x(1-x-y1-y2)1{y1+y2<1-x} + x(1-x-y1-y2-y3)1{y1+y2+y3<1-x} )
double beta1(double x, double y1, double y2, double y3, bool clamp = false);

// beta_0(u, y_0) for k = 0, otherwise -beta_1(u, y_0, y_1 + ... + y_{k-1}, y_k).
// y holds y_0..y_k.
double bar_beta(std::size_t k, double u, std::span<const double> y);

// Integral of bar_beta over u in [0,1], exact: the integrand is a quadratic
// polynomial in u between the points where a fractional part wraps.
double integrate_bar_beta(std::size_t k, std::span<const double> y);

// f(x_0) f(x_k) times the closed-form integral of bar_beta_k. gtilde holds
// gtilde(x_0)..gtilde(x_k).
double phi_k_closed(std::size_t k, double f_first, double f_last, std::span<const double> gtilde);

// phi_n(k) = ceil(ratio (1 + k)), ratio = upper / lower bound of g_n.
std::size_t phi_n(double ratio, std::size_t k);
std::size_t phi_n(const Model& model, int n, std::size_t k);

// psi_{s_1:s_k}(u, y) = sum_{i=1}^{i_max} prod_{q=0}^{k} |(i+q-1, i+q] cap (u + sum_{j<s_q} y_j, u + sum_{j<=s_q} y_j]|
// with s_0 = 0. s holds s_1..s_k (strictly increasing, positive); y holds y_0..y_{s_k}.
double psi(std::span<const std::size_t> s, double u, std::span<const double> y, std::size_t i_max);

// sigma_1^2(h) = eta((gtilde_0 (h - eta_tilde_1(h)))^2), exact or by quadrature when
// the model allows it; otherwise Monte Carlo with `samples` draws.
EstimateWithCI sigma1_sq(const Model& model, const TestFunction& h, CounterRng* rng = nullptr,
                         std::size_t samples = 100000);

enum class Sigma2Method { beta_mc, closed_form_mc };

struct Sigma2Result {
    EstimateWithCI total;
    std::vector<EstimateWithCI> per_k;  // k = 0..lags
    std::size_t lags = 0;
    Sigma2Method method = Sigma2Method::closed_form_mc;
};

// sum_k E[h(X_0) h(X_k) integral bar_beta_k(u, gtilde_0(X_0..X_k))] over i.i.d. X ~ eta,
// k = 0..ceil(ratio_0).
Sigma2Result sigma2_sq(const Model& model, const TestFunction& h, Sigma2Method method, std::size_t samples,
                       CounterRng& rng);

// Per-sample draws behind sigma2_sq, one value of the k-sum per i.i.d. tuple.
std::vector<double> sigma2_samples(const Model& model, const TestFunction& h, Sigma2Method method,
                                   std::size_t samples, std::uint64_t key, std::vector<std::vector<double>>* per_k = nullptr);

struct VarianceReport {
    EstimateWithCI sigma1_sq;
    Sigma2Result sigma2_sq;
    EstimateWithCI total() const;
};

VarianceReport variance_report(const Model& model, const TestFunction& h, Sigma2Method method, std::size_t samples,
                               CounterRng& rng);

// bar f_n(x_0..x_phi) = sum_{k=0}^{phi} f(x_0) f(x_k) integral bar_beta_k(u, gtilde(x_0..x_k)),
// phi = phi_n(0).
class BarF {
public:
    BarF(TestFunction f, PotentialSpec gtilde, double ratio);

    std::size_t arity() const { return arity_; }
    double operator()(std::span<const double> points) const;  // arity * dim values
    double from_values(std::span<const double> f_values, std::span<const double> gtilde_values) const;

private:
    TestFunction f_;
    PotentialSpec gtilde_;
    std::size_t arity_;
};

BarF build_bar_f_n(const TestFunction& f, const PotentialSpec& gtilde, double ratio);

// f_n = g_n (eta_bar_n(g_n) f - eta_bar_n(g_n f)), centred so that eta_bar_n(f_n) = 0.
TestFunction centred_test_function(const Model& model, int n, const TestFunction& f);

// P f_n for the centred f_n, as a function of the selected position.
TestFunction transformed_test_function(const Model& model, int n, const TestFunction& f);

// eta_tilde_n(P f_n^2 - (P f_n)^2) / eta_bar_n(g_n)^4
double mutation_variance_term(const Model& model, int n, const TestFunction& f);

struct RecursiveVarianceTerms {
    double propagated = 0.0;     // V_n(P f_n) / eta_bar_n(g_n)^4
    double mutation = 0.0;       // eta_tilde_n(P f_n^2 - (P f_n)^2) / eta_bar_n(g_n)^4
    EstimateWithCI selection;    // E[eta_bar_n^{phi_n(0), M}(bar f_n)]
    EstimateWithCI total;
};

// One step of the variance recursion at step n >= 1. v_n is the asymptotic
// variance at step n of the transformed test function P f_n.
RecursiveVarianceTerms recursive_variance_step(const Model& model, int n, const TestFunction& f, double v_n,
                                               std::size_t replicates, std::size_t particles, std::uint64_t seed);

// Asymptotic variance of (1/sqrt M) sum h(Y_1): sigma_1^2(h) + sigma_2^2(h).
EstimateWithCI first_selection_variance(const Model& model, const TestFunction& h, std::size_t samples,
                                        std::uint64_t seed);

}  // namespace smclab

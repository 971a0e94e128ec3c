#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "smclab/model.hpp"
#include "smclab/resampling.hpp"

namespace smclab {

// Y_n (selected), X_n (mutated) and the weight profile of X_n under g_n.
// Step 0 has Y_0 = X_0 and no ancestors.
struct StepRecord {
    int step = 0;
    ParticleSystem selected;
    ParticleSystem mutated;
    WeightProfile profile;
    std::vector<std::size_t> ancestors;
};

struct FilterOptions {
    Scheme scheme = Scheme::stratified;
    bool keep_history = true;  // false keeps only the final step
};

struct FilterTrajectory {
    std::uint64_t seed = 0;
    std::size_t particles = 0;
    int steps = 0;
    Scheme scheme = Scheme::stratified;
    std::vector<StepRecord> records;

    const StepRecord& at(int n) const;
    const StepRecord& last() const { return records.back(); }
};

// Runs selection/mutation up to step n_steps. Every random draw comes from a
// stream keyed by (seed, purpose, step), so a run is a pure function of its seed.
FilterTrajectory run_filter(const Model& model, std::size_t particles, int n_steps, std::uint64_t seed,
                            FilterOptions options = {});

using WindowFn = std::function<double(std::span<const double>)>;      // k+1 consecutive positions
using PsiFn = std::function<double(double, std::span<const double>)>;  // (u, t+1 weights)

// (1/M) sum_{i=1}^{M-k} h(X^i, ..., X^{i+k})
double k_tuple_mean(const ParticleSystem& ps, std::size_t k, const WindowFn& h);
double k_tuple_mean(const FilterTrajectory& traj, int n, std::size_t k, const WindowFn& h);

// (1/M) sum_{m=1}^{M-t} h(X_n^m..X_n^{m+t}) psi(u_n^{m-1}, w_n^m..w_n^{m+t})
double conjecture2_lhs(const FilterTrajectory& traj, int n, std::size_t t, const WindowFn& h, const PsiFn& psi);

// Same window sum with psi(U, gtilde_n(X_n^m)..gtilde_n(X_n^{m+t})), one U ~ U(0,1) per call.
double conjecture2_rhs(const FilterTrajectory& traj, const Model& model, int n, std::size_t t, const WindowFn& h,
                       const PsiFn& psi, CounterRng& rng);

// Columns: step,index,y_position,x_position,weight. Coordinates of
// multi-dimensional positions are joined with ';'.
void write_trajectory_csv(const FilterTrajectory& traj, std::ostream& out);

}  // namespace smclab

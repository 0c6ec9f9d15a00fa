#pragma once

#include <cstdint>
#include <vector>

#include "jiqlab/dist.hpp"
#include "jiqlab/rng.hpp"
#include "jiqlab/tail_curve.hpp"

namespace jiqlab {

// Equilibrium point: lambda * Phi^c(w) on the grid. Requires 0 <= lambda < 1.
TailCurve equilibrium_point(double lambda, const ServiceDistribution& dist,
                            const WorkloadGrid& grid);

// Infinite-server trajectory from the empty state:
// lambda * integral of F^c over [w, w + t]. Any lambda >= 0 is accepted.
TailCurve fluid_transient(double lambda, const ServiceDistribution& dist, double t,
                          const WorkloadGrid& grid);

// Running sums for the regenerative M/GI/1 estimator. Batches computed
// independently can be merged; means and standard errors compose.
class Mg1Accumulator {
public:
    explicit Mg1Accumulator(std::size_t grid_size = 0);

    void add_cycle(const std::vector<double>& time_above, double cycle_length);
    void merge(const Mg1Accumulator& other);

    std::int64_t cycles() const { return cycles_; }
    std::vector<double> means() const;
    std::vector<double> stderrs() const;
    double cycle_length_mean() const;
    double cycle_length_stderr() const;

private:
    std::int64_t cycles_ = 0;
    std::vector<double> sum_;
    std::vector<double> sum_sq_;
    double len_sum_ = 0.0;
    double len_sum_sq_ = 0.0;
};

// Simulates one regenerative cycle of the M/GI/1 workload (arrival rate lambda)
// starting with an arrival into the empty system and ending at the next such
// arrival. Fills time_above[k] with the time the workload exceeded grid[k];
// returns the cycle length.
double mg1_cycle(double lambda, const ServiceDistribution& dist, const WorkloadGrid& grid,
                 RngStream& rng, std::vector<double>& time_above);

struct Mg1Bound {
    TailCurve curve;  // kind mg1_bound, with per-point standard errors
    double cycle_length_mean = 0.0;
    double cycle_length_stderr = 0.0;
    std::int64_t cycles = 0;

    // Stationary M/GI/1 busy probability implied by the cycle estimates.
    double busy_probability() const { return curve.values.front() / cycle_length_mean; }
};

// Monte-Carlo estimate of x**_w, the expected time per regenerative cycle that
// the M/GI/1 workload exceeds w. Requires 0 < lambda < 1 and n_cycles >= 1.
Mg1Bound mg1_bound(double lambda, const ServiceDistribution& dist, const WorkloadGrid& grid,
                   std::int64_t n_cycles, RngStream& rng);

}  // namespace jiqlab

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jiqlab/engine.hpp"
#include "jiqlab/fluid.hpp"
#include "jiqlab/tail_curve.hpp"

namespace jiqlab {

struct Estimate {
    double value = 0.0;
    double half_width = 0.0;  // 95% confidence half-width
};

// Time-averaged post-warmup state. tail.stderrs holds per-point standard errors
// and tail_half_widths the matching 95% half-widths (batch means, 20 batches).
struct StationaryEstimate {
    std::string scenario_id;
    std::size_t n = 0;
    double lambda = 0.0;
    TailCurve tail;
    std::vector<double> tail_half_widths;
    Estimate busy_frac;
    std::optional<Estimate> wait_prob;
    std::size_t samples = 0;
};

inline constexpr std::size_t kBatchCount = 20;
inline constexpr std::size_t kMinSnapshots = 100;
inline constexpr std::size_t kMinArrivals = 100;

// Throws InsufficientData with fewer than 100 snapshots after warmup.
StationaryEstimate estimate_stationary(const Trace& trace, double warmup);

// Fraction of post-warmup arrivals sent to a busy server or blocked, with a
// binomial 95% half-width. A zero-rate trace yields 0 exactly.
Estimate waiting_probability(const Trace& trace, double warmup);

struct IndependenceRow {
    std::vector<double> levels;  // one level per coordinate
    double joint = 0.0;
    double product = 0.0;
    double diff = 0.0;
};

struct IndependenceResult {
    double distance = 0.0;   // max |joint - product|
    double noise_sigma = 0.0;  // binomial sigma of the estimator at the worst row
    std::size_t samples = 0;
    std::size_t group_size = 2;
    std::vector<IndependenceRow> rows;
    TailCurve marginal;  // P{W_1 > w} on the trace grid (pooled over groups)
    std::optional<std::string> warning;
};

struct IndependenceOptions {
    std::size_t group_size = 2;
    // Use every disjoint group of tracked servers (1-2, 3-4, ...) instead of only
    // the first. Valid when the policy is symmetric in server labels.
    bool pool_groups = false;
};

// Joint-vs-product distance from raw samples: samples[s] holds group_size workloads.
IndependenceResult independence_from_samples(std::span<const std::vector<double>> samples,
                                             std::span<const double> levels,
                                             const WorkloadGrid& marginal_grid,
                                             std::size_t group_size);

// Throws InsufficientData when fewer than group_size servers were tracked or fewer
// than 100 snapshots follow the warmup. LIFO idle selection yields a warning.
IndependenceResult independence_distance(const Trace& trace, double warmup,
                                         std::span<const double> levels,
                                         const IndependenceOptions& opts = {});

struct BoundReport {
    std::vector<std::size_t> flagged;  // grid indices exceeding bound + 3 sigma
    // Indices where the Monte-Carlo bound is not resolved (zero, or standard error
    // above half the value): far tail levels that no simulated cycle reached.
    // These are reported but not tested.
    std::vector<std::size_t> unresolved;
    double max_excess = 0.0;           // max of (empirical - bound) / sigma, for the record
    bool passed() const { return flagged.empty(); }
};

// Compares the stationary mean tail against the regenerative M/GI/1 bound.
BoundReport verify_mg1_bound(const StationaryEstimate& estimate, const TailCurve& bound);

struct ConvergenceRow {
    std::string scenario_id;
    std::size_t n = 0;
    double sup_dist = 0.0;
    double wait_prob = 0.0;
    double ci = 0.0;  // wait_prob 95% half-width
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;  // sorted by n
    bool sup_dist_strictly_decreasing = false;
    double log_log_slope = 0.0;  // least-squares slope of log sup_dist against log n
};

ConvergenceTable convergence_report(std::span<const StationaryEstimate> estimates,
                                    const TailCurve& target);

}  // namespace jiqlab

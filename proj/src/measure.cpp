#include "jiqlab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "jiqlab/error.hpp"

namespace jiqlab {

namespace {

// Two-sided 97.5% Student-t quantile with 19 degrees of freedom (20 batches).
constexpr double kT19 = 2.093024054408263;

std::size_t first_after(const Trace& trace, double warmup) {
    const double cut = trace.start_time + warmup;
    auto it = std::upper_bound(trace.snapshots.begin(), trace.snapshots.end(), cut,
                               [](double t, const Snapshot& s) { return t < s.time; });
    return static_cast<std::size_t>(it - trace.snapshots.begin());
}

}  // namespace

StationaryEstimate estimate_stationary(const Trace& trace, double warmup) {
    const std::size_t begin = first_after(trace, warmup);
    const std::size_t count = trace.snapshots.size() - begin;
    if (count < kMinSnapshots) {
        throw InsufficientData("estimate_stationary: " + std::to_string(count) +
                               " snapshots after warmup, need " + std::to_string(kMinSnapshots));
    }
    const std::size_t k = trace.grid.size();
    std::vector<std::vector<double>> batch(kBatchCount, std::vector<double>(k, 0.0));
    std::vector<double> mean(k, 0.0);
    for (std::size_t b = 0; b < kBatchCount; ++b) {
        const std::size_t lo = begin + b * count / kBatchCount;
        const std::size_t hi = begin + (b + 1) * count / kBatchCount;
        for (std::size_t s = lo; s < hi; ++s) {
            const auto& v = trace.snapshots[s].values;
            for (std::size_t j = 0; j < k; ++j) {
                batch[b][j] += v[j];
                mean[j] += v[j];
            }
        }
        for (auto& x : batch[b]) x /= static_cast<double>(hi - lo);
    }
    for (auto& x : mean) x /= static_cast<double>(count);

    StationaryEstimate est;
    est.scenario_id = trace.scenario_id;
    est.n = trace.n;
    est.lambda = trace.lambda;
    est.samples = count;
    est.tail = TailCurve{trace.grid, mean, std::vector<double>(k, 0.0), CurveKind::empirical};
    est.tail_half_widths.assign(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        double ss = 0.0;
        for (std::size_t b = 0; b < kBatchCount; ++b) {
            const double d = batch[b][j] - mean[j];
            ss += d * d;
        }
        const double se = std::sqrt(ss / static_cast<double>(kBatchCount - 1) /
                                    static_cast<double>(kBatchCount));
        est.tail.stderrs[j] = se;
        est.tail_half_widths[j] = kT19 * se;
    }
    est.busy_frac = {est.tail.values[0], est.tail_half_widths[0]};
    if (trace.lambda == 0.0 || trace.arrivals.size() >= kMinArrivals) {
        try {
            est.wait_prob = waiting_probability(trace, warmup);
        } catch (const InsufficientData&) {
        }
    }
    return est;
}

Estimate waiting_probability(const Trace& trace, double warmup) {
    if (trace.lambda == 0.0) return {0.0, 0.0};
    const double cut = trace.start_time + warmup;
    std::size_t total = 0;
    std::size_t waited = 0;
    for (const auto& a : trace.arrivals) {
        if (a.time <= cut) continue;
        ++total;
        if (!a.destination_was_idle || a.blocked) ++waited;
    }
    if (total < kMinArrivals) {
        throw InsufficientData("waiting_probability: " + std::to_string(total) +
                               " arrivals after warmup, need " + std::to_string(kMinArrivals));
    }
    const double p = static_cast<double>(waited) / static_cast<double>(total);
    return {p, 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(total))};
}

IndependenceResult independence_from_samples(std::span<const std::vector<double>> samples,
                                             std::span<const double> levels,
                                             const WorkloadGrid& marginal_grid,
                                             std::size_t group_size) {
    if (group_size < 2) throw InvalidParameter("independence: group size must be >= 2");
    if (levels.empty()) throw InvalidParameter("independence: need at least one level");
    IndependenceResult res;
    res.group_size = group_size;
    res.samples = samples.size();
    if (samples.empty()) throw InsufficientData("independence: no samples");
    const auto count = static_cast<double>(samples.size());
    const std::size_t g = levels.size();

    // above[c][l]: indicator counts of coordinate c exceeding levels[l].
    std::vector<std::vector<double>> marg(group_size, std::vector<double>(g, 0.0));
    for (const auto& s : samples) {
        for (std::size_t c = 0; c < group_size; ++c) {
            for (std::size_t l = 0; l < g; ++l) {
                if (s[c] > levels[l]) marg[c][l] += 1.0;
            }
        }
    }
    for (auto& row : marg) {
        for (auto& x : row) x /= count;
    }

    // Enumerate every level tuple in levels^group_size.
    std::vector<std::size_t> idx(group_size, 0);
    for (;;) {
        double joint = 0.0;
        for (const auto& s : samples) {
            bool all = true;
            for (std::size_t c = 0; c < group_size && all; ++c) all = s[c] > levels[idx[c]];
            if (all) joint += 1.0;
        }
        joint /= count;
        double product = 1.0;
        double var_term = 1.0;
        for (std::size_t c = 0; c < group_size; ++c) {
            const double p = marg[c][idx[c]];
            product *= p;
            var_term *= p * (1.0 - p);
        }
        IndependenceRow row;
        for (std::size_t c = 0; c < group_size; ++c) row.levels.push_back(levels[idx[c]]);
        row.joint = joint;
        row.product = product;
        row.diff = joint - product;
        if (std::abs(row.diff) >= res.distance) {
            res.distance = std::abs(row.diff);
        }
        res.noise_sigma = std::max(res.noise_sigma, std::sqrt(var_term / count));
        res.rows.push_back(std::move(row));

        std::size_t c = 0;
        while (c < group_size && ++idx[c] == g) idx[c++] = 0;
        if (c == group_size) break;
    }

    res.marginal = TailCurve::zeros(marginal_grid, CurveKind::empirical);
    for (const auto& s : samples) {
        const std::size_t below = marginal_grid.count_below(s[0]);
        for (std::size_t j = 0; j < below; ++j) res.marginal.values[j] += 1.0;
    }
    for (auto& x : res.marginal.values) x /= count;
    return res;
}

IndependenceResult independence_distance(const Trace& trace, double warmup,
                                         std::span<const double> levels,
                                         const IndependenceOptions& opts) {
    const std::size_t begin = first_after(trace, warmup);
    const std::size_t count = trace.snapshots.size() - begin;
    if (count < kMinSnapshots) {
        throw InsufficientData("independence_distance: " + std::to_string(count) +
                               " snapshots after warmup, need " + std::to_string(kMinSnapshots));
    }
    const std::size_t tracked = trace.snapshots[begin].tracked.size();
    if (tracked < opts.group_size || opts.group_size < 2) {
        throw InsufficientData("independence_distance: " + std::to_string(tracked) +
                               " tracked servers, need at least " + std::to_string(opts.group_size));
    }
    const std::size_t groups = opts.pool_groups ? tracked / opts.group_size : 1;
    std::vector<std::vector<double>> samples;
    samples.reserve(count * groups);
    for (std::size_t s = begin; s < trace.snapshots.size(); ++s) {
        const auto& w = trace.snapshots[s].tracked;
        for (std::size_t gi = 0; gi < groups; ++gi) {
            samples.emplace_back(w.begin() + static_cast<std::ptrdiff_t>(gi * opts.group_size),
                                 w.begin() + static_cast<std::ptrdiff_t>((gi + 1) * opts.group_size));
        }
    }
    IndependenceResult res = independence_from_samples(samples, levels, trace.grid, opts.group_size);
    if (trace.idle_selection != IdleSelection::uniform) {
        res.warning =
            "idle selection is not uniform: server labels are not exchangeable, so the "
            "independence limit is not guaranteed";
    }
    return res;
}

BoundReport verify_mg1_bound(const StationaryEstimate& estimate, const TailCurve& bound) {
    if (!(estimate.tail.grid == bound.grid)) {
        throw GridMismatch("verify_mg1_bound: estimate and bound use different grids");
    }
    BoundReport rep;
    rep.max_excess = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < bound.values.size(); ++j) {
        const double se_emp = estimate.tail.has_stderr() ? estimate.tail.stderrs[j] : 0.0;
        const double se_bound = bound.has_stderr() ? bound.stderrs[j] : 0.0;
        if (bound.has_stderr() && (bound.values[j] <= 0.0 || se_bound > 0.5 * bound.values[j])) {
            rep.unresolved.push_back(j);
            continue;
        }
        const double sigma = std::sqrt(se_emp * se_emp + se_bound * se_bound);
        const double excess = estimate.tail.values[j] - bound.values[j];
        if (excess > 3.0 * sigma) rep.flagged.push_back(j);
        if (sigma > 0.0) rep.max_excess = std::max(rep.max_excess, excess / sigma);
    }
    return rep;
}

ConvergenceTable convergence_report(std::span<const StationaryEstimate> estimates,
                                    const TailCurve& target) {
    ConvergenceTable table;
    for (const auto& e : estimates) {
        ConvergenceRow row;
        row.scenario_id = e.scenario_id;
        row.n = e.n;
        row.sup_dist = sup_distance(e.tail, target);
        if (e.wait_prob) {
            row.wait_prob = e.wait_prob->value;
            row.ci = e.wait_prob->half_width;
        }
        table.rows.push_back(row);
    }
    std::stable_sort(table.rows.begin(), table.rows.end(),
                     [](const ConvergenceRow& a, const ConvergenceRow& b) { return a.n < b.n; });
    table.sup_dist_strictly_decreasing = table.rows.size() >= 2;
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
        if (!(table.rows[i].sup_dist < table.rows[i - 1].sup_dist)) {
            table.sup_dist_strictly_decreasing = false;
        }
    }
    // Least-squares slope over rows with positive distance.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (const auto& r : table.rows) {
        if (r.sup_dist <= 0.0 || r.n == 0) continue;
        const double x = std::log(static_cast<double>(r.n));
        const double y = std::log(r.sup_dist);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m >= 2) {
        const double denom = m * sxx - sx * sx;
        if (denom != 0.0) table.log_log_slope = (m * sxy - sx * sy) / denom;
    }
    return table;
}

}  // namespace jiqlab

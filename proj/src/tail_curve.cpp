#include "jiqlab/tail_curve.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "jiqlab/dist.hpp"
#include "jiqlab/error.hpp"

namespace jiqlab {

WorkloadGrid::WorkloadGrid(std::vector<double> points) : points_(std::move(points)) {
    if (points_.empty() || points_.front() != 0.0) {
        throw InvalidParameter("grid must start at w = 0");
    }
    for (std::size_t i = 1; i < points_.size(); ++i) {
        if (!(points_[i] > points_[i - 1]) || !std::isfinite(points_[i])) {
            throw InvalidParameter("grid must be strictly increasing and finite");
        }
    }
}

WorkloadGrid WorkloadGrid::uniform(double w_max, std::size_t points) {
    if (points < 2 || !(w_max > 0.0)) {
        throw InvalidParameter("uniform grid needs >= 2 points and w_max > 0");
    }
    std::vector<double> p(points);
    for (std::size_t i = 0; i < points; ++i) {
        p[i] = w_max * static_cast<double>(i) / static_cast<double>(points - 1);
    }
    return WorkloadGrid(std::move(p));
}

WorkloadGrid WorkloadGrid::geometric(double w_max, std::size_t points, double first_step) {
    if (points < 2 || !(w_max > 0.0) || !(first_step > 0.0)) {
        throw InvalidParameter("geometric grid needs >= 2 points, w_max > 0, first_step > 0");
    }
    const auto steps = static_cast<double>(points - 1);
    if (first_step * steps >= w_max) {
        return uniform(w_max, points);
    }
    // Solve first_step * (r^K - 1) / (r - 1) = w_max for the growth ratio r > 1.
    auto reach = [&](double r) { return first_step * (std::pow(r, steps) - 1.0) / (r - 1.0); };
    double lo = 1.0 + 1e-12;
    double hi = 2.0;
    while (reach(hi) < w_max) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (reach(mid) < w_max ? lo : hi) = mid;
    }
    const double r = 0.5 * (lo + hi);
    std::vector<double> p(points);
    p[0] = 0.0;
    double step = first_step;
    for (std::size_t i = 1; i < points; ++i) {
        p[i] = p[i - 1] + step;
        step *= r;
    }
    p.back() = w_max;
    return WorkloadGrid(std::move(p));
}

std::size_t WorkloadGrid::count_below(double v) const {
    return static_cast<std::size_t>(std::lower_bound(points_.begin(), points_.end(), v) -
                                    points_.begin());
}

WorkloadGrid default_grid(double lambda, const ServiceDistribution& dist, std::size_t points,
                          double first_step, double floor) {
    double w_max = first_step * static_cast<double>(points - 1);
    if (lambda > 0.0 && lambda * dist.residual_tail(0.0) >= floor) {
        double lo = 0.0;
        double hi = 1.0;
        while (lambda * dist.residual_tail(hi) >= floor) {
            lo = hi;
            hi *= 2.0;
        }
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (lambda * dist.residual_tail(mid) >= floor ? lo : hi) = mid;
        }
        w_max = hi;
    }
    return WorkloadGrid::geometric(w_max, points, first_step);
}

std::string_view to_string(CurveKind kind) {
    switch (kind) {
        case CurveKind::empirical: return "empirical";
        case CurveKind::equilibrium: return "equilibrium";
        case CurveKind::transient: return "transient";
        case CurveKind::mg1_bound: return "mg1_bound";
    }
    return "unknown";
}

CurveKind curve_kind_from_string(std::string_view name) {
    for (auto k : {CurveKind::empirical, CurveKind::equilibrium, CurveKind::transient,
                   CurveKind::mg1_bound}) {
        if (to_string(k) == name) return k;
    }
    throw InvalidParameter("unknown curve kind '" + std::string(name) + "'");
}

TailCurve TailCurve::zeros(const WorkloadGrid& grid, CurveKind kind) {
    return TailCurve{grid, std::vector<double>(grid.size(), 0.0), {}, kind};
}

bool TailCurve::is_non_increasing() const {
    return std::is_sorted(values.rbegin(), values.rend());
}

double sup_distance(const TailCurve& a, const TailCurve& b) {
    if (!(a.grid == b.grid) || a.values.size() != b.values.size()) {
        throw GridMismatch("sup_distance: curves are on different grids");
    }
    double d = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        d = std::max(d, std::abs(a.values[i] - b.values[i]));
    }
    return d;
}

}  // namespace jiqlab

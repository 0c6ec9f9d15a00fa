#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace jiqlab {

class ServiceDistribution;

// Workload levels w_0 = 0 < w_1 < ... < w_K.
class WorkloadGrid {
public:
    WorkloadGrid() = default;
    // Throws InvalidParameter unless the points start at 0 and strictly increase.
    explicit WorkloadGrid(std::vector<double> points);

    static WorkloadGrid uniform(double w_max, std::size_t points);

    // points levels from 0, first step first_step, growing geometrically (or
    // uniform if that already reaches) up to w_max.
    static WorkloadGrid geometric(double w_max, std::size_t points, double first_step);

    std::span<const double> points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    double operator[](std::size_t i) const { return points_[i]; }
    double back() const { return points_.back(); }

    // Number of grid levels strictly below v, i.e. the count of w with v > w.
    std::size_t count_below(double v) const;

    bool operator==(const WorkloadGrid&) const = default;

private:
    std::vector<double> points_;
};

// Default measurement grid: 201 levels from 0 with a 0.05 first step, reaching the
// level where lambda * Phi^c drops below 1e-3.
WorkloadGrid default_grid(double lambda, const ServiceDistribution& dist, std::size_t points = 201,
                          double first_step = 0.05, double floor = 1e-3);

enum class CurveKind { empirical, equilibrium, transient, mg1_bound };

std::string_view to_string(CurveKind kind);
CurveKind curve_kind_from_string(std::string_view name);

// A non-increasing function of workload level restricted to a grid.
struct TailCurve {
    WorkloadGrid grid;
    std::vector<double> values;
    std::vector<double> stderrs;  // empty for analytic curves
    CurveKind kind = CurveKind::empirical;

    static TailCurve zeros(const WorkloadGrid& grid, CurveKind kind);

    bool has_stderr() const { return !stderrs.empty(); }
    bool is_non_increasing() const;
};

// max over grid points of |a - b|. Throws GridMismatch if the grids differ.
double sup_distance(const TailCurve& a, const TailCurve& b);

}  // namespace jiqlab

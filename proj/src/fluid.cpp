#include "jiqlab/fluid.hpp"

#include <algorithm>
#include <cmath>

#include "jiqlab/error.hpp"

namespace jiqlab {

TailCurve equilibrium_point(double lambda, const ServiceDistribution& dist,
                            const WorkloadGrid& grid) {
    if (!(lambda >= 0.0 && lambda < 1.0)) {
        throw InvalidParameter("equilibrium_point: lambda must lie in [0, 1)");
    }
    TailCurve c = TailCurve::zeros(grid, CurveKind::equilibrium);
    if (lambda == 0.0) return c;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        c.values[i] = lambda * dist.residual_tail(grid[i]);
    }
    return c;
}

TailCurve fluid_transient(double lambda, const ServiceDistribution& dist, double t,
                          const WorkloadGrid& grid) {
    if (!(lambda >= 0.0) || !(t >= 0.0)) {
        throw InvalidParameter("fluid_transient: need lambda >= 0 and t >= 0");
    }
    TailCurve c = TailCurve::zeros(grid, CurveKind::transient);
    if (lambda == 0.0 || t == 0.0) return c;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        c.values[i] = lambda * dist.tail_integral(grid[i], grid[i] + t);
    }
    // Quadrature noise must not break monotonicity in w.
    for (std::size_t i = 1; i < c.values.size(); ++i) {
        c.values[i] = std::min(c.values[i], c.values[i - 1]);
    }
    return c;
}

Mg1Accumulator::Mg1Accumulator(std::size_t grid_size)
    : sum_(grid_size, 0.0), sum_sq_(grid_size, 0.0) {}

void Mg1Accumulator::add_cycle(const std::vector<double>& time_above, double cycle_length) {
    for (std::size_t k = 0; k < sum_.size(); ++k) {
        sum_[k] += time_above[k];
        sum_sq_[k] += time_above[k] * time_above[k];
    }
    len_sum_ += cycle_length;
    len_sum_sq_ += cycle_length * cycle_length;
    ++cycles_;
}

void Mg1Accumulator::merge(const Mg1Accumulator& other) {
    if (other.sum_.size() != sum_.size()) {
        throw GridMismatch("Mg1Accumulator::merge: grid sizes differ");
    }
    for (std::size_t k = 0; k < sum_.size(); ++k) {
        sum_[k] += other.sum_[k];
        sum_sq_[k] += other.sum_sq_[k];
    }
    len_sum_ += other.len_sum_;
    len_sum_sq_ += other.len_sum_sq_;
    cycles_ += other.cycles_;
}

namespace {

double stderr_of(double sum, double sum_sq, std::int64_t count) {
    if (count < 2) return 0.0;
    const auto n = static_cast<double>(count);
    const double mean = sum / n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    return std::sqrt(var / n);
}

}  // namespace

std::vector<double> Mg1Accumulator::means() const {
    std::vector<double> m(sum_.size(), 0.0);
    if (cycles_ == 0) return m;
    for (std::size_t k = 0; k < sum_.size(); ++k) m[k] = sum_[k] / static_cast<double>(cycles_);
    return m;
}

std::vector<double> Mg1Accumulator::stderrs() const {
    std::vector<double> s(sum_.size(), 0.0);
    for (std::size_t k = 0; k < sum_.size(); ++k) s[k] = stderr_of(sum_[k], sum_sq_[k], cycles_);
    return s;
}

double Mg1Accumulator::cycle_length_mean() const {
    return cycles_ == 0 ? 0.0 : len_sum_ / static_cast<double>(cycles_);
}

double Mg1Accumulator::cycle_length_stderr() const {
    return stderr_of(len_sum_, len_sum_sq_, cycles_);
}

double mg1_cycle(double lambda, const ServiceDistribution& dist, const WorkloadGrid& grid,
                 RngStream& rng, std::vector<double>& time_above) {
    time_above.assign(grid.size(), 0.0);
    const auto points = grid.points();
    double length = 0.0;
    double v = dist.sample(rng);
    for (;;) {
        const double gap = -std::log(rng.uniform_open0()) / lambda;
        // Workload decreases at unit rate from v over [0, gap).
        for (std::size_t k = 0; k < points.size() && points[k] < v; ++k) {
            time_above[k] += std::min(gap, v - points[k]);
        }
        length += gap;
        if (v <= gap) {
            return length;  // next arrival finds the system empty
        }
        v = (v - gap) + dist.sample(rng);
    }
}

Mg1Bound mg1_bound(double lambda, const ServiceDistribution& dist, const WorkloadGrid& grid,
                   std::int64_t n_cycles, RngStream& rng) {
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw InvalidParameter("mg1_bound: lambda must lie in (0, 1)");
    }
    if (n_cycles < 1) {
        throw InvalidParameter("mg1_bound: need at least one cycle");
    }
    Mg1Accumulator acc(grid.size());
    std::vector<double> per_cycle;
    for (std::int64_t c = 0; c < n_cycles; ++c) {
        const double len = mg1_cycle(lambda, dist, grid, rng, per_cycle);
        acc.add_cycle(per_cycle, len);
    }
    Mg1Bound out;
    out.curve = TailCurve{grid, acc.means(), acc.stderrs(), CurveKind::mg1_bound};
    out.cycle_length_mean = acc.cycle_length_mean();
    out.cycle_length_stderr = acc.cycle_length_stderr();
    out.cycles = acc.cycles();
    return out;
}

}  // namespace jiqlab

#include <cmath>
#include <vector>

#include "doctest.h"
#include "jiqlab/error.hpp"
#include "jiqlab/fluid.hpp"
#include "jiqlab/tail_curve.hpp"

using namespace jiqlab;

TEST_CASE("workload grids") {
    const auto u = WorkloadGrid::uniform(10.0, 201);
    CHECK(u.size() == 201);
    CHECK(u[0] == 0.0);
    CHECK(u.back() == doctest::Approx(10.0));
    CHECK(u[1] == doctest::Approx(0.05));

    const auto g = WorkloadGrid::geometric(20.0, 101, 0.05);
    CHECK(g.size() == 101);
    CHECK(g[1] == doctest::Approx(0.05));
    CHECK(g.back() == doctest::Approx(20.0).epsilon(1e-9));
    for (std::size_t i = 2; i < g.size(); ++i) {
        CHECK(g[i] - g[i - 1] == doctest::Approx((g[2] - g[1]) * std::pow((g[2] - g[1]) / g[1], i - 2)).epsilon(1e-6));
    }

    CHECK_THROWS_AS(WorkloadGrid({0.5, 1.0}), InvalidParameter);
    CHECK_THROWS_AS(WorkloadGrid({0.0, 1.0, 1.0}), InvalidParameter);
    CHECK_THROWS_AS(WorkloadGrid(std::vector<double>{}), InvalidParameter);

    const WorkloadGrid small({0.0, 1.0, 2.0});
    CHECK(small.count_below(0.0) == 0);
    CHECK(small.count_below(0.5) == 1);
    CHECK(small.count_below(1.0) == 1);
    CHECK(small.count_below(2.5) == 3);
}

TEST_CASE("default grid reaches the negligible tail") {
    const auto e = unit_exponential();
    const auto grid = default_grid(0.4, e);
    CHECK(grid.size() == 201);
    CHECK(grid[1] <= 0.05 + 1e-12);
    CHECK(0.4 * e.residual_tail(grid.back()) == doctest::Approx(1e-3).epsilon(1e-3));
}

TEST_CASE("sup distance") {
    const auto grid = WorkloadGrid::uniform(5.0, 51);
    const auto star = equilibrium_point(0.4, unit_exponential(), grid);
    CHECK(sup_distance(star, star) == 0.0);
    CHECK(sup_distance(star, TailCurve::zeros(grid, CurveKind::empirical)) == doctest::Approx(0.4));
    TailCurve a{grid, std::vector<double>(grid.size(), 0.3), {}, CurveKind::empirical};
    TailCurve b{grid, std::vector<double>(grid.size(), 0.1), {}, CurveKind::empirical};
    CHECK(sup_distance(a, b) == doctest::Approx(0.2));
    CHECK_THROWS_AS(sup_distance(a, TailCurve::zeros(WorkloadGrid::uniform(5.0, 11), CurveKind::empirical)),
                    GridMismatch);
    for (auto k : {CurveKind::empirical, CurveKind::equilibrium, CurveKind::transient, CurveKind::mg1_bound}) {
        CHECK(curve_kind_from_string(to_string(k)) == k);
    }
}

TEST_CASE("equilibrium point") {
    const auto grid = WorkloadGrid({0.0, 0.5, 1.0, 2.0});
    const auto e = unit_exponential();
    const auto star = equilibrium_point(0.4, e, grid);
    CHECK(star.kind == CurveKind::equilibrium);
    CHECK(star.values[0] == doctest::Approx(0.4));
    CHECK(star.values[2] == doctest::Approx(0.147152).epsilon(1e-5));
    CHECK(star.values[2] == doctest::Approx(0.4 * std::exp(-1.0)).epsilon(1e-12));
    CHECK(star.is_non_increasing());

    const auto zero = equilibrium_point(0.0, e, grid);
    for (double v : zero.values) CHECK(v == 0.0);

    const auto p = make_distribution(law::Pareto{1.5, 1.0});
    const auto d = make_distribution(law::Deterministic{1.0});
    CHECK(equilibrium_point(0.4, p, grid).values[0] == doctest::Approx(0.4));
    CHECK(equilibrium_point(0.4, d, grid).values[1] == doctest::Approx(0.2));

    CHECK_THROWS_AS(equilibrium_point(1.0, e, grid), InvalidParameter);
    CHECK_THROWS_AS(equilibrium_point(-0.1, e, grid), InvalidParameter);
}

TEST_CASE("fluid transient") {
    const auto grid = WorkloadGrid::uniform(6.0, 61);
    const auto e = unit_exponential();
    const auto zero = fluid_transient(0.4, e, 0.0, grid);
    for (double v : zero.values) CHECK(v == 0.0);

    const auto one = fluid_transient(0.4, e, 1.0, grid);
    CHECK(one.kind == CurveKind::transient);
    CHECK(one.values[0] == doctest::Approx(0.252848).epsilon(1e-5));
    CHECK(one.values[0] == doctest::Approx(0.4 * (1.0 - std::exp(-1.0))).epsilon(1e-9));

    // x_up(t) = x* - lambda * Phi^c(w + t).
    const auto star = equilibrium_point(0.4, e, grid);
    for (double t : {0.5, 1.0, 3.0}) {
        const auto up = fluid_transient(0.4, e, t, grid);
        CHECK(up.is_non_increasing());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(up.values[i] == doctest::Approx(star.values[i] - 0.4 * std::exp(-(grid[i] + t))).epsilon(1e-8));
        }
    }

    for (const auto& dist : {e, make_distribution(law::Deterministic{1.0}), make_distribution(law::Uniform{0.0, 2.0}),
                             make_distribution(law::Pareto{2.5, 1.0}),
                             make_distribution(law::HyperExponential{{0.5, 0.5}, {2.0, 2.0 / 3.0}}),
                             make_distribution(law::LogNormal{0.0, 0.75})}) {
        CAPTURE(dist.label());
        CHECK(sup_distance(fluid_transient(0.45, dist, 1e4, grid), equilibrium_point(0.45, dist, grid)) < 1e-3);
    }
    // With alpha = 1.5 the gap lambda * Phi^c(t) decays like t^(-1/2) and is
    // still about 1.7e-3 at t = 1e4.
    const auto p = make_distribution(law::Pareto{1.5, 1.0});
    const auto pstar = equilibrium_point(0.45, p, grid);
    const auto late = fluid_transient(0.45, p, 1e4, grid);
    const double gap = 0.45 * 2.0 * std::pow(1.0 / 3.0, 1.5) / std::sqrt(1e4);
    CHECK(sup_distance(late, pstar) == doctest::Approx(gap).epsilon(1e-6));

    // Pointwise non-decreasing in t.
    std::vector<double> prev(grid.size(), 0.0);
    for (double t : {0.1, 0.5, 1.0, 2.0, 5.0, 20.0}) {
        const auto c = fluid_transient(0.45, p, t, grid);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(c.values[i] >= prev[i] - 1e-12);
            prev[i] = c.values[i];
        }
    }

    CHECK(fluid_transient(1.5, e, 1.0, grid).values[0] == doctest::Approx(1.5 * (1.0 - std::exp(-1.0))));
}

TEST_CASE("single M/GI/1 cycle") {
    const auto grid = WorkloadGrid({0.0, 0.5, 1.0, 2.0});
    const auto e = unit_exponential();
    RngStream rng(9, "cycle");
    std::vector<double> above;
    for (int i = 0; i < 1000; ++i) {
        const double len = mg1_cycle(0.4, e, grid, rng, above);
        REQUIRE(above.size() == grid.size());
        REQUIRE(len > 0.0);
        REQUIRE(above[0] <= len);
        for (std::size_t k = 1; k < above.size(); ++k) REQUIRE(above[k] <= above[k - 1]);
    }
}

TEST_CASE("M/GI/1 regenerative bound") {
    const auto e = unit_exponential();
    for (double lambda : {0.4, 0.5}) {
        const auto grid = default_grid(lambda, e);
        RngStream rng(17, "bound");
        const auto b = mg1_bound(lambda, e, grid, 100000, rng);
        const double target = 1.0 / (1.0 - lambda);
        CAPTURE(lambda);
        CHECK(b.curve.kind == CurveKind::mg1_bound);
        CHECK(b.curve.has_stderr());
        CHECK(std::abs(b.curve.values[0] - target) < 3.0 * b.curve.stderrs[0]);
        // Mean cycle = 1/lambda + E[busy period]; busy probability = lambda.
        CHECK(std::abs(b.cycle_length_mean - (1.0 / lambda + target)) < 4.0 * b.cycle_length_stderr);
        CHECK(b.busy_probability() == doctest::Approx(lambda).epsilon(0.02));
        CHECK(b.curve.values.back() < 0.05 * b.curve.values.front());
        CHECK(b.curve.is_non_increasing());
    }
    RngStream rng(1);
    CHECK_THROWS_AS(mg1_bound(1.0, e, default_grid(0.4, e), 10, rng), InvalidParameter);
    CHECK_THROWS_AS(mg1_bound(0.4, e, default_grid(0.4, e), 0, rng), InvalidParameter);
}

TEST_CASE("M/GI/1 accumulators merge like one batch") {
    const auto e = unit_exponential();
    const auto grid = WorkloadGrid({0.0, 1.0});
    RngStream r1(3, "x");
    Mg1Accumulator whole(grid.size()), a(grid.size()), b(grid.size());
    std::vector<double> above;
    for (int i = 0; i < 200; ++i) {
        const double len = mg1_cycle(0.4, e, grid, r1, above);
        whole.add_cycle(above, len);
        (i < 80 ? a : b).add_cycle(above, len);
    }
    a.merge(b);
    CHECK(a.cycles() == whole.cycles());
    CHECK(a.means()[0] == doctest::Approx(whole.means()[0]).epsilon(1e-12));
    CHECK(a.stderrs()[1] == doctest::Approx(whole.stderrs()[1]).epsilon(1e-9));
    CHECK(a.cycle_length_mean() == doctest::Approx(whole.cycle_length_mean()).epsilon(1e-12));
}

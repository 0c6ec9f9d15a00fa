#include <cmath>
#include <vector>

#include "doctest.h"
#include "jiqlab/engine.hpp"
#include "jiqlab/error.hpp"
#include "jiqlab/fluid.hpp"

using namespace jiqlab;

namespace {

ScenarioConfig base_config(std::size_t n, double lambda, std::uint64_t seed = 1) {
    ScenarioConfig c;
    c.n = n;
    c.lambda = lambda;
    c.seed = seed;
    c.grid = WorkloadGrid::uniform(5.0, 51);
    return c;
}

SamplePlan quiet_plan() {
    SamplePlan p;
    p.interval = 0.0;
    p.tracked_servers = 0;
    return p;
}

}  // namespace

TEST_CASE("initial states") {
    auto c = base_config(10, 0.4);
    System all_idle(c);
    CHECK(all_idle.busy_count() == 0);
    CHECK(all_idle.idle_pool().size() == 10);

    c = base_config(3, 0.4);
    System custom(c, InitialCondition::custom({1.0, 0.0, 0.0}));
    CHECK(custom.busy_count() == 1);
    CHECK(custom.snapshot_curve().values[0] == doctest::Approx(1.0 / 3.0));
    CHECK(custom.workload(0) == 1.0);
    custom.audit();

    CHECK_THROWS_AS(System(c, InitialCondition::custom({1.0, -0.5, 0.0})), ConfigError);
    CHECK_THROWS_AS(System(c, InitialCondition::custom({1.0, 0.5})), ConfigError);
    c.subsets = {{1, 2}};
    CHECK_THROWS_AS(System{c}, ConfigError);
    c.subsets.clear();
    c.grid = WorkloadGrid{};
    CHECK_THROWS_AS(System{c}, ConfigError);
}

TEST_CASE("deterministic service departs exactly one unit later") {
    auto c = base_config(1, 1e-6);
    c.dist = make_distribution(law::Deterministic{1.0});
    System s(c);
    const auto a = s.step();
    REQUIRE(a.type == EventType::arrival);
    CHECK(a.destination_was_idle);
    CHECK(s.next_event_time() == a.time + 1.0);
    const auto d = s.step();
    CHECK(d.type == EventType::departure);
    CHECK(d.time == a.time + 1.0);
    CHECK(s.busy_count() == 0);
}

TEST_CASE("arrivals to full buffers are blocked") {
    auto c = base_config(2, 50.0);
    c.buffer = 1;
    System s(c, InitialCondition::custom({100.0, 100.0}));
    const auto before = s.ledger().subsets[0].work_arrived;
    const auto r = s.step();
    REQUIRE(r.type == EventType::arrival);
    CHECK(r.blocked);
    CHECK(s.ledger().blocked_total == 1);
    CHECK(s.ledger().arrivals_total == 1);
    CHECK(s.ledger().subsets[0].work_arrived == before);
    CHECK(s.queue_length(0) == 1);
    CHECK(s.queue_length(1) == 1);
    s.audit();
}

TEST_CASE("zero arrival rate keeps the system idle") {
    System s(base_config(10, 0.0));
    CHECK_FALSE(s.has_pending_events());
    const Trace t = s.run(100.0, SamplePlan{});
    CHECK(t.arrivals.empty());
    CHECK(t.events == 0);
    CHECK(t.snapshots.size() == 100);
    for (const auto& snap : t.snapshots) {
        for (double v : snap.values) REQUIRE(v == 0.0);
    }
}

TEST_CASE("Poisson arrival count") {
    System s(base_config(100, 0.4, 3));
    const Trace t = s.run(100.0, quiet_plan());
    const double count = static_cast<double>(t.final_ledger.arrivals_total);
    CHECK(std::abs(count - 4000.0) <= 3.0 * std::sqrt(4000.0));
    CHECK(t.arrivals.size() == t.final_ledger.arrivals_total);
}

TEST_CASE("zero horizon gives an empty trace") {
    System s(base_config(10, 0.4));
    const Trace t = s.run(0.0, SamplePlan{});
    CHECK(t.snapshots.empty());
    CHECK(t.arrivals.empty());
    CHECK(t.events == 0);
}

TEST_CASE("deterministic renewal arrival count") {
    auto c = base_config(10, 0.4);
    c.arrivals = ArrivalSpec{ArrivalKind::renewal, make_distribution(law::Deterministic{1.0})};
    for (double horizon : {10.0, 37.3, 250.0}) {
        System s(c);
        const Trace t = s.run(horizon, quiet_plan());
        const double expected = std::floor(horizon * 0.4 * 10);
        CAPTURE(horizon);
        CHECK(std::abs(static_cast<double>(t.final_ledger.arrivals_total) - expected) <= 1.0);
    }
}

TEST_CASE("snapshots count workloads above each level") {
    auto c = base_config(2, 0.0);
    c.grid = WorkloadGrid({0.0, 1.0});
    System idle(c);
    CHECK(idle.snapshot_curve().values == std::vector<double>{0.0, 0.0});

    System s(c, InitialCondition::custom({0.5, 2.0}));
    CHECK(s.snapshot_curve().values == std::vector<double>{1.0, 0.5});
    const auto snap = s.snapshot(2);
    CHECK(snap.tracked == std::vector<double>{0.5, 2.0});

    // Workloads drain at unit rate between events.
    const Trace t = s.run(0.75, [] {
        SamplePlan p;
        p.interval = 0.0;
        p.times = {0.25, 0.75};
        p.tracked_servers = 2;
        return p;
    }());
    REQUIRE(t.snapshots.size() == 2);
    CHECK(t.snapshots[0].tracked[0] == doctest::Approx(0.25));
    CHECK(t.snapshots[1].tracked[0] == 0.0);
    CHECK(t.snapshots[1].tracked[1] == doctest::Approx(1.25));
    CHECK(t.snapshots[1].values == std::vector<double>{0.5, 0.5});
}

TEST_CASE("arrival marks follow the service law") {
    auto c = base_config(500, 0.4, 4);
    System s(c);
    const Trace t = s.run(100.0, quiet_plan());
    const auto marks = t.final_ledger.arrival_marks();
    const double total = static_cast<double>(t.final_ledger.arrivals_total);
    REQUIRE(marks.size() == c.grid.size());
    for (std::size_t k = 0; k < c.grid.size(); ++k) {
        CAPTURE(c.grid[k]);
        CHECK(std::abs(marks[k] / total - c.dist.tail(c.grid[k])) < 0.01);
    }
}

TEST_CASE("identical config and seed give identical traces") {
    auto c = base_config(50, 0.45, 12);
    c.dist = make_distribution(law::Pareto{1.5, 1.0});
    SamplePlan plan;
    plan.tracked_servers = 4;
    System a(c), b(c);
    const Trace ta = a.run(200.0, plan);
    const Trace tb = b.run(200.0, plan);
    REQUIRE(ta.snapshots.size() == tb.snapshots.size());
    CHECK(ta.events == tb.events);
    for (std::size_t i = 0; i < ta.snapshots.size(); ++i) {
        REQUIRE(ta.snapshots[i].values == tb.snapshots[i].values);
        REQUIRE(ta.snapshots[i].tracked == tb.snapshots[i].tracked);
    }
    c.seed = 13;
    System other(c);
    CHECK(other.run(200.0, plan).events != ta.events);
}

TEST_CASE("jiq never queues while a server is idle") {
    auto c = base_config(5, 0.9, 6);
    System s(c);
    for (int e = 0; e < 20000; ++e) {
        const bool had_idle = !s.idle_pool().empty();
        const auto r = s.step();
        if (r.type == EventType::arrival) REQUIRE(r.destination_was_idle == had_idle);
        if (e % 97 == 0) s.audit();
    }
}

TEST_CASE("ledger identities hold event by event") {
    auto c = base_config(12, 0.7, 8);
    c.dist = make_distribution(law::HyperExponential{{0.5, 0.5}, {2.0, 2.0 / 3.0}});
    c.subsets = {{0, 5}, {1, 7}};
    c.buffer = 3;
    System s(c, InitialCondition::custom(std::vector<double>(12, 0.7)));
    Trace t;
    t.n = c.n;
    t.checkpoints.push_back(s.checkpoint());
    for (int e = 0; e < 5000; ++e) {
        s.step();
        t.checkpoints.push_back(s.checkpoint());
    }
    const auto rep = check_conservation(t);
    CHECK(rep.checkpoints == 5001);
    CHECK(rep.ok());
    CHECK(rep.max_work_error < 1e-10);
    for (const auto& sub : t.checkpoints.back().subsets) {
        CHECK(sub.busy == sub.initial_busy + sub.rho_a - sub.rho_d);
    }
}

TEST_CASE("run-level conservation report") {
    auto c = base_config(200, 0.45, 9);
    c.dist = make_distribution(law::Pareto{1.5, 1.0});
    c.subsets = {{0, 50}, {1, 150}};
    System s(c);
    const Trace t = s.run(300.0, SamplePlan{});
    const auto rep = check_conservation(t);
    CHECK(rep.checkpoints == t.snapshots.size());
    CHECK(rep.ok());
    REQUIRE(t.snapshots[0].subsets.size() == 2);
    for (const auto& snap : t.snapshots) {
        for (std::size_t k = 0; k < c.grid.size(); ++k) {
            REQUIRE(snap.subsets[0][k] + snap.subsets[1][k] == doctest::Approx(snap.values[k]));
        }
    }
}

TEST_CASE("a subset that receives nothing drains at its busy rate") {
    auto c = base_config(100, 0.3, 10);
    c.subsets = {{1, 60}, {2, 40}};
    c.policy.preferred_tag = 1;
    std::vector<double> w(100, 0.0);
    for (std::size_t i = 60; i < 100; ++i) w[i] = 2.0 + static_cast<double>(i % 5);
    SamplePlan plan;
    plan.interval = 0.5;
    plan.tracked_servers = 0;
    System s(c, InitialCondition::custom(w));
    const Trace t = s.run(10.0, plan);
    const auto rep = check_conservation(t);
    CHECK(t.final_ledger.subsets[1].arrivals == 0);
    CHECK(rep.quiet_segments > 0);
    CHECK(rep.quiet_violations == 0);
    CHECK(rep.ok());
}

TEST_CASE("event budget") {
    auto c = base_config(10, 0.4);
    c.event_budget = 10;
    System s(c);
    CHECK_THROWS_AS(s.run(1000.0, quiet_plan()), EventBudgetExceeded);
}

TEST_CASE("finite buffers keep queue lengths bounded") {
    auto c = base_config(20, 0.95, 11);
    c.buffer = 2;
    c.policy.kind = PolicyKind::random;
    System s(c);
    for (int e = 0; e < 20000; ++e) {
        s.step();
        for (ServerId i = 0; i < 20; ++i) REQUIRE(s.queue_length(i) <= 2);
    }
    CHECK(s.ledger().blocked_total > 0);
    s.audit();
}

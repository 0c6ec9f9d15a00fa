#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jiqlab/dist.hpp"
#include "jiqlab/policy.hpp"
#include "jiqlab/tail_curve.hpp"

namespace jiqlab {

enum class ArrivalKind { poisson, renewal };

// System interarrival times are base_law / (lambda * n); base_law has mean 1, so
// the per-server interarrival law A = base_law / lambda has mean 1/lambda.
struct ArrivalSpec {
    ArrivalKind kind = ArrivalKind::poisson;
    ServiceDistribution base_law = unit_exponential();
};

struct SubsetSpec {
    int tag = 0;
    std::size_t size = 0;
};

// Initial workloads: empty means all idle; otherwise one entry per server.
struct InitialCondition {
    std::vector<double> workloads;

    static InitialCondition all_idle() { return {}; }
    static InitialCondition custom(std::vector<double> w) { return {std::move(w)}; }
};

struct ScenarioConfig {
    std::string scenario_id = "scenario";
    std::size_t n = 100;
    double lambda = 0.4;
    ServiceDistribution dist = unit_exponential();
    ArrivalSpec arrivals;
    PolicySpec policy;
    std::uint32_t buffer = 0;  // 0 = unlimited
    double horizon = 2000.0;
    double warmup = 500.0;
    WorkloadGrid grid;
    double sample_interval = 1.0;
    std::size_t tracked_servers = 2;
    std::uint64_t seed = 1;
    std::vector<SubsetSpec> subsets;  // empty = a single subset with tag 0
    InitialCondition initial;
    std::uint64_t event_budget = 2'000'000'000ULL;

    // At lambda >= 1/2 concentration is conjectured, not proven; runs are exploratory.
    bool exploratory() const { return lambda >= 0.5; }
};

}  // namespace jiqlab

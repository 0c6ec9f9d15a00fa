#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "jiqlab/csv.hpp"
#include "jiqlab/engine.hpp"
#include "jiqlab/measure.hpp"
#include "jiqlab/scenario.hpp"

namespace jiqlab {

inline constexpr const char* kVersion = "1.0.0";

struct RunOutput {
    ScenarioConfig config;
    csv::SummaryRow summary;
    std::vector<csv::CurveRow> curves;  // empirical (with stderr), then equilibrium
    StationaryEstimate estimate;
    ConservationReport conservation;
    std::vector<std::string> warnings;
    std::optional<Trace> trace;  // kept only on request
};

// Simulates one scenario and reduces it to its summary and curves.
RunOutput run_scenario(const ScenarioConfig& config, bool keep_trace = false);

struct SweepAxes {
    std::vector<std::size_t> ns;
    std::vector<std::uint64_t> seeds;
    std::vector<double> lambdas;
};

struct SweepFailure {
    std::string scenario_id;
    std::string message;
};

struct SweepResult {
    std::vector<RunOutput> runs;  // sorted by scenario_id
    std::vector<SweepFailure> failures;
    std::vector<csv::ConvergenceCsvRow> convergence;
};

std::string sweep_scenario_id(const std::string& base, std::size_t n, double lambda,
                              std::uint64_t seed);

// One run per (n, seed, lambda) point, up to `workers` at a time. An empty base
// grid is derived per lambda from the law. A failing run is recorded and the
// sweep continues. Output order does not depend on workers.
SweepResult run_sweep(const ScenarioConfig& base, const SweepAxes& axes, unsigned workers = 1);

// Writes summary.csv, curves.csv, convergence.csv and manifest.json into out_dir,
// plus per-run files under out_dir/runs/<scenario_id>/.
void write_sweep(const SweepResult& result, const ScenarioConfig& base, const SweepAxes& axes,
                 const std::filesystem::path& out_dir);

nlohmann::json run_manifest(const SweepResult& result, const ScenarioConfig& base,
                            const SweepAxes& axes);

}  // namespace jiqlab

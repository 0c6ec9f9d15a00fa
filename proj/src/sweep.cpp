#include "jiqlab/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "jiqlab/config.hpp"
#include "jiqlab/error.hpp"
#include "jiqlab/fluid.hpp"

namespace jiqlab {

RunOutput run_scenario(const ScenarioConfig& config, bool keep_trace) {
    const auto t0 = std::chrono::steady_clock::now();
    System system(config);
    SamplePlan plan;
    plan.interval = config.sample_interval;
    plan.tracked_servers = config.tracked_servers;
    Trace trace = system.run(config.horizon, plan);

    RunOutput out;
    out.config = config;
    out.warnings = config_warnings(config);
    out.conservation = check_conservation(trace);
    out.estimate = estimate_stationary(trace, config.warmup);

    auto& s = out.summary;
    s.scenario_id = config.scenario_id;
    s.n = config.n;
    s.lambda = config.lambda;
    s.policy = std::string(to_string(config.policy.kind));
    s.dist = config.dist.label();
    s.busy_frac_mean = out.estimate.busy_frac.value;
    s.busy_frac_stderr = out.estimate.tail.stderrs.front();
    if (out.estimate.wait_prob) s.wait_prob = out.estimate.wait_prob->value;
    std::size_t post = 0;
    std::size_t blocked = 0;
    for (const auto& a : trace.arrivals) {
        if (a.time <= trace.start_time + config.warmup) continue;
        ++post;
        if (a.blocked) ++blocked;
    }
    s.blocked_frac = post > 0 ? static_cast<double>(blocked) / static_cast<double>(post) : 0.0;
    s.events_processed = trace.events;

    out.curves = csv::curve_rows(config.scenario_id, out.estimate.tail);
    if (config.lambda < 1.0) {
        const TailCurve star = equilibrium_point(config.lambda, config.dist, config.grid);
        s.sup_dist_to_star = sup_distance(out.estimate.tail, star);
        const auto eq_rows = csv::curve_rows(config.scenario_id, star);
        out.curves.insert(out.curves.end(), eq_rows.begin(), eq_rows.end());
    }
    if (keep_trace) out.trace = std::move(trace);
    s.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

std::string sweep_scenario_id(const std::string& base, std::size_t n, double lambda,
                              std::uint64_t seed) {
    return base + "-n" + std::to_string(n) + "-l" + csv::format_double(lambda) + "-s" +
           std::to_string(seed);
}

SweepResult run_sweep(const ScenarioConfig& base, const SweepAxes& axes, unsigned workers) {
    if (axes.ns.empty() || axes.seeds.empty() || axes.lambdas.empty()) {
        throw ConfigError("sweep: every axis needs at least one value");
    }
    std::vector<ScenarioConfig> jobs;
    for (double lambda : axes.lambdas) {
        for (std::size_t n : axes.ns) {
            for (std::uint64_t seed : axes.seeds) {
                ScenarioConfig c = base;
                c.n = n;
                c.lambda = lambda;
                c.seed = seed;
                c.scenario_id = sweep_scenario_id(base.scenario_id, n, lambda, seed);
                // An empty grid means "derive from lambda and the law".
                if (c.grid.size() == 0 && lambda < 1.0) c.grid = default_grid(lambda, c.dist);
                if (!c.initial.workloads.empty() && c.initial.workloads.size() != n) {
                    c.initial = InitialCondition::all_idle();
                }
                jobs.push_back(std::move(c));
            }
        }
    }

    std::vector<std::optional<RunOutput>> outputs(jobs.size());
    std::vector<std::optional<std::string>> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                const auto problems = validate_config(jobs[i]);
                if (!problems.empty()) throw ConfigValidationError(problems);
                outputs[i] = run_scenario(jobs[i]);
                if (!outputs[i]->conservation.ok()) {
                    errors[i] = "ledger identities violated";
                }
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(jobs.size())));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    SweepResult result;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (errors[i]) result.failures.push_back({jobs[i].scenario_id, *errors[i]});
        if (outputs[i]) result.runs.push_back(std::move(*outputs[i]));
    }
    std::sort(result.runs.begin(), result.runs.end(), [](const RunOutput& a, const RunOutput& b) {
        return a.config.scenario_id < b.config.scenario_id;
    });
    std::sort(result.failures.begin(), result.failures.end(),
              [](const SweepFailure& a, const SweepFailure& b) { return a.scenario_id < b.scenario_id; });

    // Convergence tables across n, one per (lambda, seed).
    std::map<std::pair<double, std::uint64_t>, std::vector<const RunOutput*>> groups;
    for (const auto& r : result.runs) groups[{r.config.lambda, r.config.seed}].push_back(&r);
    for (const auto& [key, runs] : groups) {
        if (key.first >= 1.0) continue;
        std::vector<StationaryEstimate> est;
        for (const auto* r : runs) est.push_back(r->estimate);
        const TailCurve star = equilibrium_point(key.first, base.dist, runs.front()->config.grid);
        const auto rows = csv::convergence_rows(convergence_report(est, star));
        result.convergence.insert(result.convergence.end(), rows.begin(), rows.end());
    }
    std::stable_sort(result.convergence.begin(), result.convergence.end(),
                     [](const csv::ConvergenceCsvRow& a, const csv::ConvergenceCsvRow& b) {
                         return a.scenario_id < b.scenario_id;
                     });
    return result;
}

nlohmann::json run_manifest(const SweepResult& result, const ScenarioConfig& base,
                            const SweepAxes& axes) {
    using nlohmann::json;
    json m;
    m["tool"] = "jiqlab";
    m["version"] = kVersion;
    m["base_config"] = config_to_json(base);
    m["axes"] = json{{"n", axes.ns}, {"seed", axes.seeds}, {"lambda", axes.lambdas}};
    json scenarios = json::array();
    for (const auto& r : result.runs) {
        scenarios.push_back(json{{"scenario_id", r.config.scenario_id},
                                 {"n", r.config.n},
                                 {"lambda", r.config.lambda},
                                 {"seed", r.config.seed},
                                 {"caveats", r.warnings}});
    }
    m["scenarios"] = scenarios;
    json failures = json::array();
    for (const auto& f : result.failures) {
        failures.push_back(json{{"scenario_id", f.scenario_id}, {"error", f.message}});
    }
    m["failures"] = failures;
    return m;
}

void write_sweep(const SweepResult& result, const ScenarioConfig& base, const SweepAxes& axes,
                 const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir / "runs");
    auto open = [](const fs::path& p) {
        std::ofstream os(p);
        if (!os) throw Error("cannot write '" + p.string() + "'");
        return os;
    };
    std::vector<csv::SummaryRow> summary;
    std::vector<csv::CurveRow> curves;
    for (const auto& r : result.runs) {
        const fs::path dir = out_dir / "runs" / r.config.scenario_id;
        fs::create_directories(dir);
        {
            auto os = open(dir / "summary.csv");
            csv::write_summary(os, {r.summary});
        }
        {
            auto os = open(dir / "curves.csv");
            csv::write_curves(os, r.curves);
        }
        summary.push_back(r.summary);
        curves.insert(curves.end(), r.curves.begin(), r.curves.end());
    }
    {
        auto os = open(out_dir / "summary.csv");
        csv::write_summary(os, summary);
    }
    {
        auto os = open(out_dir / "curves.csv");
        csv::write_curves(os, curves);
    }
    {
        auto os = open(out_dir / "convergence.csv");
        csv::write_convergence(os, result.convergence);
    }
    {
        auto os = open(out_dir / "manifest.json");
        os << run_manifest(result, base, axes).dump(2) << '\n';
    }
}

}  // namespace jiqlab

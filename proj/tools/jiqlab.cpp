#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "jiqlab/acceptance.hpp"
#include "jiqlab/config.hpp"
#include "jiqlab/csv.hpp"
#include "jiqlab/engine.hpp"
#include "jiqlab/error.hpp"
#include "jiqlab/fluid.hpp"
#include "jiqlab/measure.hpp"
#include "jiqlab/sweep.hpp"

namespace fs = std::filesystem;
using namespace jiqlab;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitAcceptance = 4;

struct Common {
    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
    std::optional<std::size_t> n;
    std::optional<double> lambda;
    std::string dist;
    std::string policy;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "Scenario config (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--out", c.out, "Output directory (default: stdout)");
    cmd->add_option("--seed", c.seed, "Master seed");
    cmd->add_option("--workers", c.workers, "Concurrent runs")->check(CLI::PositiveNumber);
    cmd->add_option("--n", c.n, "Number of servers");
    cmd->add_option("--lambda", c.lambda, "Per-server arrival rate");
    cmd->add_option("--dist", c.dist, "Service law, e.g. exponential or pareto:alpha=1.5");
    cmd->add_option("--policy", c.policy, "Policy name or JSON object");
}

std::optional<fs::path> out_dir(const Common& c) {
    if (const char* env = std::getenv("JIQLAB_OUT"); env != nullptr && *env != '\0') return fs::path(env);
    if (!c.out.empty()) return fs::path(c.out);
    return std::nullopt;
}

// Config file (or defaults) with command-line overrides patched in before
// validation, so a derived grid follows the overridden lambda and law.
ParsedConfig load_config(const Common& c, const SweepAxes* axes = nullptr) {
    nlohmann::json doc = nlohmann::json::object();
    if (!c.config_path.empty()) {
        std::ifstream in(c.config_path);
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(c.config_path + ": " + e.what());
        }
    }
    if (axes != nullptr) {
        // Sweep axes stand in for keys the base config leaves out.
        if (!doc.contains("n") && !axes->ns.empty()) doc["n"] = axes->ns.front();
        if (!doc.contains("lambda") && !axes->lambdas.empty()) doc["lambda"] = axes->lambdas.front();
    }
    if (c.seed) doc["seed"] = *c.seed;
    if (c.n) doc["n"] = *c.n;
    if (c.lambda) doc["lambda"] = *c.lambda;
    if (!c.dist.empty()) doc["dist"] = c.dist;
    if (!c.policy.empty()) {
        if (c.policy.front() == '{') {
            try {
                doc["policy"] = nlohmann::json::parse(c.policy);
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError(std::string("--policy: ") + e.what());
            }
        } else {
            doc["policy"] = c.policy;
        }
    }
    ParsedConfig parsed = parse_config(doc);
    for (const auto& w : parsed.warnings) std::cerr << "warning: " << w << '\n';
    return parsed;
}

ServiceDistribution dist_or_default(const std::string& text) {
    return text.empty() ? unit_exponential() : parse_dist_shorthand(text);
}

template <class Writer>
void emit(const std::optional<fs::path>& dir, const std::string& file, Writer&& write) {
    if (!dir) {
        write(std::cout);
        return;
    }
    fs::create_directories(*dir);
    std::ofstream os(*dir / file);
    if (!os) throw Error("cannot write " + (*dir / file).string());
    write(os);
}

int cmd_simulate(const Common& c) {
    const ParsedConfig parsed = load_config(c);
    const RunOutput run = run_scenario(parsed.config);
    const auto dir = out_dir(c);
    emit(dir, "summary.csv", [&](std::ostream& os) { csv::write_summary(os, {run.summary}); });
    emit(dir, "curves.csv", [&](std::ostream& os) { csv::write_curves(os, run.curves); });
    if (dir) {
        std::ofstream(*dir / "config.json") << config_to_json(run.config).dump(2) << '\n';
    }
    if (!run.conservation.ok()) {
        std::cerr << "conservation check failed\n";
        return kExitRuntime;
    }
    return 0;
}

template <class T>
std::vector<T> or_single(const std::vector<T>& v, T fallback) {
    return v.empty() ? std::vector<T>{fallback} : v;
}

int cmd_sweep(const Common& c, const SweepAxes& given) {
    const ParsedConfig parsed = load_config(c, &given);
    SweepAxes axes;
    axes.ns = or_single(given.ns, parsed.config.n);
    axes.seeds = or_single(given.seeds, parsed.config.seed);
    axes.lambdas = or_single(given.lambdas, parsed.config.lambda);
    ScenarioConfig base = parsed.config;
    if (!parsed.grid_explicit) base.grid = WorkloadGrid{};  // re-derived per lambda
    const SweepResult result = run_sweep(base, axes, c.workers);
    if (const auto dir = out_dir(c)) {
        write_sweep(result, base, axes, *dir);
    } else {
        std::vector<csv::SummaryRow> rows;
        for (const auto& r : result.runs) rows.push_back(r.summary);
        csv::write_summary(std::cout, rows);
    }
    for (const auto& f : result.failures) std::cerr << "failed: " << f.scenario_id << ": " << f.message << '\n';
    return result.failures.empty() ? 0 : kExitRuntime;
}

int cmd_fluid(const Common& c, const std::vector<double>& times, double w_max, std::size_t points) {
    const double lambda = c.lambda.value_or(0.4);
    const ServiceDistribution dist = dist_or_default(c.dist);
    if (w_max <= 0.0 && lambda >= 1.0) throw InvalidParameter("lambda >= 1 requires --w-max");
    const WorkloadGrid grid = w_max > 0.0 ? WorkloadGrid::uniform(w_max, points) : default_grid(lambda, dist);
    std::vector<csv::CurveRow> rows;
    if (lambda < 1.0) rows = csv::curve_rows("fluid", equilibrium_point(lambda, dist, grid));
    for (double t : times) {
        auto tr = csv::curve_rows("fluid-t" + csv::format_double(t), fluid_transient(lambda, dist, t, grid));
        rows.insert(rows.end(), tr.begin(), tr.end());
    }
    emit(out_dir(c), "curves.csv", [&](std::ostream& os) { csv::write_curves(os, rows); });
    return 0;
}

int cmd_mg1(const Common& c, std::int64_t cycles) {
    const double lambda = c.lambda.value_or(0.4);
    if (!(lambda >= 0.0 && lambda < 1.0)) throw InvalidParameter("mg1-bound needs lambda in [0, 1)");
    const ServiceDistribution dist = dist_or_default(c.dist);
    const WorkloadGrid grid = default_grid(lambda, dist);
    RngStream rng(c.seed.value_or(1), "mg1");
    const Mg1Bound b = mg1_bound(lambda, dist, grid, cycles, rng);
    emit(out_dir(c), "curves.csv",
         [&](std::ostream& os) { csv::write_curves(os, csv::curve_rows("mg1-bound", b.curve)); });
    std::cerr << "x**_0=" << b.curve.values.front() << " +- " << b.curve.stderrs.front()
              << " cycle_length=" << b.cycle_length_mean << " +- " << b.cycle_length_stderr
              << " busy_probability=" << b.busy_probability() << '\n';
    return 0;
}

int cmd_independence(const Common& c, std::vector<double> levels, std::size_t group_size, bool pool) {
    ScenarioConfig config = load_config(c).config;
    config.tracked_servers = pool ? config.n : std::max(config.tracked_servers, group_size);
    if (config.tracked_servers > config.n) throw InvalidParameter("group size exceeds n");
    SamplePlan plan;
    plan.interval = config.sample_interval;
    plan.tracked_servers = config.tracked_servers;
    System system(config);
    const Trace trace = system.run(config.horizon, plan);
    IndependenceOptions opts;
    opts.group_size = group_size;
    opts.pool_groups = pool;
    const IndependenceResult r = independence_distance(trace, config.warmup, levels, opts);
    if (r.warning) std::cerr << "warning: " << *r.warning << '\n';
    emit(out_dir(c), "independence.csv", [&](std::ostream& os) {
        csv::write_independence(os, csv::independence_rows(config.scenario_id, r));
    });
    std::cerr << "D=" << r.distance << " noise_sigma=" << r.noise_sigma << " samples=" << r.samples << '\n';
    return 0;
}

int cmd_validate(const std::vector<int>& only) {
    AcceptanceOptions opts;
    opts.only = only;
    const auto results = run_acceptance(opts, std::cout);
    for (const auto& r : results) {
        if (!r.passed) return kExitAcceptance;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"jiqlab: Join-Idle-Queue simulation and fluid-limit toolkit"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    Common common;
    auto* simulate = app.add_subcommand("simulate", "Run one scenario");
    add_common(simulate, common);

    SweepAxes axes;
    auto* sweep = app.add_subcommand("sweep", "Run a grid of n x seed x lambda");
    add_common(sweep, common);
    sweep->add_option("--ns", axes.ns, "Server counts")->delimiter(',');
    sweep->add_option("--seeds", axes.seeds, "Seeds")->delimiter(',');
    sweep->add_option("--lambdas", axes.lambdas, "Arrival rates")->delimiter(',');

    std::vector<double> times;
    double w_max = 0.0;
    std::size_t points = 201;
    auto* fluid = app.add_subcommand("fluid", "Equilibrium and transient fluid curves");
    add_common(fluid, common);
    fluid->add_option("--t", times, "Transient times")->delimiter(',');
    fluid->add_option("--w-max", w_max, "Uniform grid upper end");
    fluid->add_option("--points", points, "Grid points")->check(CLI::Range(2, 1000000));

    std::int64_t cycles = 100000;
    auto* mg1 = app.add_subcommand("mg1-bound", "Regenerative M/GI/1 bound x**");
    add_common(mg1, common);
    mg1->add_option("--cycles", cycles, "Busy cycles to simulate")->check(CLI::PositiveNumber);

    std::vector<double> levels{0.0, 0.5, 1.0, 2.0};
    std::size_t group_size = 2;
    bool pool = false;
    auto* indep = app.add_subcommand("independence", "Joint-vs-product distance for m servers");
    add_common(indep, common);
    indep->add_option("--levels", levels, "Workload levels")->delimiter(',');
    indep->add_option("--group-size", group_size, "m")->check(CLI::Range(1, 3));
    indep->add_flag("--pool", pool, "Pool all disjoint groups of servers");

    std::vector<int> only;
    auto* validate = app.add_subcommand("validate", "Run the acceptance suite");
    validate->add_option("--only", only, "Criterion ids")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (*simulate) return cmd_simulate(common);
        if (*sweep) return cmd_sweep(common, axes);
        if (*fluid) return cmd_fluid(common, times, w_max, points);
        if (*mg1) return cmd_mg1(common, cycles);
        if (*indep) return cmd_independence(common, levels, group_size, pool);
        if (*validate) return cmd_validate(only);
    } catch (const ConfigValidationError& e) {
        std::cerr << "config error:\n";
        for (const auto& v : e.violations()) std::cerr << "  " << v << '\n';
        return kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InvalidParameter& e) {
        std::cerr << "invalid parameter: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}

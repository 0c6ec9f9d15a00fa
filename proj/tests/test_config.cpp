#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "doctest.h"
#include "jiqlab/config.hpp"
#include "jiqlab/csv.hpp"

using namespace jiqlab;
using nlohmann::json;

namespace {

bool mentions(const std::vector<std::string>& lines, const std::string& needle) {
    return std::any_of(lines.begin(), lines.end(),
                       [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

std::vector<std::string> violations_of(const json& doc) {
    try {
        parse_config(doc);
    } catch (const ConfigValidationError& e) {
        return e.violations();
    }
    return {};
}

}  // namespace

TEST_CASE("minimal config takes defaults") {
    const auto parsed = parse_config_text(R"({"n": 50, "lambda": 0.4})");
    const auto& c = parsed.config;
    CHECK(c.n == 50);
    CHECK(c.lambda == 0.4);
    CHECK(c.horizon == 2000.0);
    CHECK(c.warmup == 500.0);
    CHECK(c.tracked_servers == 2);
    CHECK(c.policy.kind == PolicyKind::jiq);
    CHECK(c.dist.kind() == DistKind::exponential);
    CHECK(c.grid == default_grid(0.4, c.dist));
    CHECK_FALSE(parsed.grid_explicit);
    CHECK(parsed.warnings.empty());

    const auto short_run = parse_config_text(R"({"n": 5, "lambda": 0.2, "horizon": 100})");
    CHECK(short_run.config.warmup == 25.0);
}

TEST_CASE("exploratory load is accepted with a warning") {
    const auto parsed = parse_config_text(R"({"n": 10, "lambda": 0.6})");
    CHECK(parsed.config.exploratory());
    CHECK(mentions(parsed.warnings, "exploratory"));
    CHECK(mentions(parse_config_text(R"({"n": 10, "lambda": 1.2})").warnings, "not subcritical"));
}

TEST_CASE("validation errors name the offending keys") {
    CHECK(mentions(violations_of({{"n", 10}, {"lambda", 0.4}, {"horizon", 100}, {"warmup", 150}}), "warmup"));
    CHECK(mentions(violations_of({{"n", 10}, {"lambda", 0.4}, {"horizon", 100}, {"warmup", 100}}), "warmup"));

    const auto many = violations_of({{"n", 0}, {"lambda", -1}, {"colour", "red"}});
    CHECK(mentions(many, "n"));
    CHECK(mentions(many, "lambda"));
    CHECK(mentions(many, "colour"));
    CHECK(many.size() >= 3);

    CHECK(mentions(violations_of({{"n", 10}, {"lambda", 0.4}, {"subsets", {{{"tag", 1}, {"size", 4}}}}}),
                   "subsets"));
    CHECK(mentions(violations_of({{"n", 10}, {"lambda", 0.4}, {"dist", "pareto:alpha=0.9"}}), "dist"));
    CHECK(mentions(violations_of({{"n", 4}, {"lambda", 0.4}, {"policy", {{"kind", "jsq_d"}, {"d", 5}}}}),
                   "policy"));
    CHECK(mentions(violations_of({{"n", 4}, {"lambda", 0.4}, {"buffer", 0}}), "buffer"));
    CHECK(mentions(violations_of({{"n", 3}, {"lambda", 0.4}, {"initial", {{"workloads", {1.0, -1.0, 0.0}}}}}),
                   "initial"));
    CHECK(mentions(violations_of({{"lambda", 0.4}}), "n"));

    CHECK_THROWS_AS(parse_config_text("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[1, 2]"), ConfigError);
    CHECK_THROWS_AS(parse_config_file("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("distribution specs") {
    const auto p = parse_dist_shorthand("pareto:alpha=1.5,scale=1");
    CHECK(p.kind() == DistKind::pareto);
    CHECK(std::get<law::Pareto>(p.params()).scale == doctest::Approx(1.0 / 3.0));

    const auto h = parse_dist_shorthand("hyperexponential:probs=0.5/0.5,rates=2/0.5");
    CHECK(h.mean() == doctest::Approx(1.0));
    CHECK(parse_dist_shorthand("exponential").mean() == doctest::Approx(1.0));

    const auto raw = parse_dist_spec(json{{"kind", "deterministic"}, {"params", {{"value", 3}}}, {"normalize", false}});
    CHECK(raw.mean() == 3.0);
    const auto norm = parse_dist_spec(json{{"kind", "uniform"}, {"params", {{"low", 0}, {"high", 4}}}});
    CHECK(norm.mean() == doctest::Approx(1.0));

    CHECK_THROWS(parse_dist_shorthand("weibull:k=2"));
    CHECK_THROWS(parse_dist_shorthand("pareto:alpha"));

    for (const auto& d : {p, h, raw, norm}) {
        const auto back = parse_dist_spec(dist_to_json(d));
        CHECK(back.label() == d.label());
        CHECK(back.mean() == doctest::Approx(d.mean()));
    }
}

TEST_CASE("full config") {
    const auto parsed = parse_config_text(R"({
        "scenario_id": "tagged",
        "n": 10,
        "lambda": 0.3,
        "dist": {"kind": "pareto", "params": {"alpha": 1.5, "scale": 1}},
        "arrivals": {"kind": "renewal", "law": "uniform:low=0,high=2"},
        "policy": {"kind": "jiq", "idle_selection": "lifo", "preferred_tag": 1},
        "buffer": 3,
        "horizon": 400,
        "warmup": 40,
        "grid": {"w_max": 10, "points": 101},
        "sample_interval": 0.5,
        "tracked_servers": 4,
        "seed": 99,
        "subsets": [{"tag": 1, "size": 6}, {"tag": 2, "size": 4}],
        "initial": {"per_tag": {"2": 3.5}},
        "event_budget": 1000000
    })");
    const auto& c = parsed.config;
    CHECK(c.scenario_id == "tagged");
    CHECK(c.arrivals.kind == ArrivalKind::renewal);
    CHECK(c.arrivals.base_law.mean() == doctest::Approx(1.0));
    CHECK(c.policy.idle_selection == IdleSelection::lifo);
    CHECK(c.policy.preferred_tag == 1);
    CHECK(c.buffer == 3);
    CHECK(c.grid == WorkloadGrid::uniform(10.0, 101));
    CHECK(parsed.grid_explicit);
    CHECK(c.seed == 99);
    REQUIRE(c.initial.workloads.size() == 10);
    CHECK(c.initial.workloads[5] == 0.0);
    CHECK(c.initial.workloads[6] == 3.5);
    CHECK(mentions(parsed.warnings, "infinite variance"));
    CHECK(mentions(parsed.warnings, "lifo"));

    // Echoed config parses back to the same document.
    const json echo = config_to_json(c);
    CHECK(config_to_json(parse_config(echo).config) == echo);
}

TEST_CASE("csv round trips") {
    std::vector<csv::SummaryRow> summary{
        {"a-n10", 10, 0.4, "jiq", "exponential[rate=1]", 0.1 + 0.2, 1e-300, std::nullopt, 0.0, 0.0123456789012345,
         123456789, 0.5},
        {"b", 1000, 0.45, "jsq_d", "pareto[alpha=1.5;scale=0.333333]", 0.45, 0.001, 0.0, 1.0 / 3.0, std::nullopt, 0,
         1e-9},
    };
    std::stringstream ss;
    csv::write_summary(ss, summary);
    CHECK(ss.str().rfind(std::string(csv::kSummaryHeader) + "\n", 0) == 0);
    CHECK(csv::read_summary(ss) == summary);

    std::vector<csv::CurveRow> curves{{"a", CurveKind::empirical, 0.0, 0.4, 0.001},
                                      {"a", CurveKind::equilibrium, 0.05, 0.4 * std::exp(-0.05), std::nullopt},
                                      {"a", CurveKind::mg1_bound, 1e3, 0.0, 0.0}};
    std::stringstream cs;
    csv::write_curves(cs, curves);
    CHECK(csv::read_curves(cs) == curves);

    std::vector<csv::IndependenceCsvRow> ind{{"a", 0.0, 0.5, 0.16, 0.1599, 1e-4}};
    std::stringstream is;
    csv::write_independence(is, ind);
    CHECK(csv::read_independence(is) == ind);

    std::vector<csv::ConvergenceCsvRow> conv{{"a", 10, 0.007, 0.004, 0.0016}, {"b", 1000, 0.001, 0.0, 0.0}};
    std::stringstream vs;
    csv::write_convergence(vs, conv);
    CHECK(csv::read_convergence(vs) == conv);
}

TEST_CASE("csv rejects malformed input") {
    std::stringstream wrong_header("scenario_id,n\nx,1\n");
    CHECK_THROWS_AS(csv::read_convergence(wrong_header), Error);
    std::stringstream bad_number(std::string(csv::kConvergenceHeader) + "\na,10,zero,0,0\n");
    CHECK_THROWS_AS(csv::read_convergence(bad_number), Error);
    std::stringstream short_row(std::string(csv::kCurvesHeader) + "\na,empirical,0\n");
    CHECK_THROWS_AS(csv::read_curves(short_row), Error);
    std::stringstream bad_kind(std::string(csv::kCurvesHeader) + "\na,guess,0,1,\n");
    CHECK_THROWS(csv::read_curves(bad_kind));
}

TEST_CASE("shortest round-trip formatting") {
    CHECK(csv::format_double(0.1) == "0.1");
    CHECK(csv::format_double(2.0) == "2");
    for (double x : {1.0 / 3.0, 1e-17, 6.02214076e23, -0.0}) {
        CHECK(std::stod(csv::format_double(x)) == x);
    }
}

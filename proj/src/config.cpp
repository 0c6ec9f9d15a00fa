#include "jiqlab/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace jiqlab {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += "; ";
        out += s;
    }
    return out;
}

double number_at(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(std::string(key) + ": expected a number");
    return v.get<double>();
}

std::vector<double> numbers_at(const json& obj, const char* key) {
    if (!obj.contains(key)) return {};
    const auto& v = obj.at(key);
    if (!v.is_array()) throw ConfigError(std::string(key) + ": expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError(std::string(key) + ": expected an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

DistParams params_for(DistKind kind, const json& p) {
    switch (kind) {
        case DistKind::exponential:
            return law::Exponential{number_at(p, "rate", 1.0)};
        case DistKind::deterministic:
            return law::Deterministic{number_at(p, "value", 1.0)};
        case DistKind::pareto:
            return law::Pareto{number_at(p, "alpha", 1.5), number_at(p, "scale", 1.0)};
        case DistKind::uniform:
            return law::Uniform{number_at(p, "low", 0.0), number_at(p, "high", 2.0)};
        case DistKind::hyperexponential:
            return law::HyperExponential{numbers_at(p, "probs"), numbers_at(p, "rates")};
        case DistKind::lognormal:
            return law::LogNormal{number_at(p, "mu", 0.0), number_at(p, "sigma", 1.0)};
    }
    throw ConfigError("unreachable distribution kind");
}

// Collects violations instead of throwing on the first one.
class Checker {
public:
    template <class F>
    void section(const std::string& key, F&& f) {
        try {
            f();
        } catch (const std::exception& e) {
            errors.push_back(key + ": " + e.what());
        }
    }
    void require(bool ok, const std::string& key, const std::string& msg) {
        if (!ok) errors.push_back(key + ": " + msg);
    }
    std::vector<std::string> errors;
};

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys{
        "scenario_id", "n",       "lambda",          "dist",    "arrivals",
        "policy",      "buffer",  "horizon",         "warmup",  "grid",
        "sample_interval", "tracked_servers", "seed", "subsets", "initial",
        "event_budget"};
    return keys;
}

bool valid_id(const std::string& id) {
    if (id.empty()) return false;
    for (char c : id) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) {
            return false;
        }
    }
    return true;
}

}  // namespace

ConfigValidationError::ConfigValidationError(std::vector<std::string> violations)
    : ConfigError("invalid configuration: " + join(violations)), violations_(std::move(violations)) {}

ServiceDistribution parse_dist_spec(const json& spec) {
    if (spec.is_string()) return parse_dist_shorthand(spec.get<std::string>());
    if (!spec.is_object() || !spec.contains("kind")) {
        throw ConfigError("expected {kind, params, normalize}");
    }
    const DistKind kind = dist_kind_from_string(spec.at("kind").get<std::string>());
    const json params = spec.value("params", json::object());
    const bool normalize = spec.value("normalize", true);
    return make_distribution(params_for(kind, params), normalize);
}

ServiceDistribution parse_dist_shorthand(std::string_view text) {
    const auto colon = text.find(':');
    const std::string kind_name(text.substr(0, colon));
    json params = json::object();
    if (colon != std::string_view::npos) {
        std::stringstream ss{std::string(text.substr(colon + 1))};
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) throw ConfigError("dist: expected key=value, got '" + item + "'");
            const std::string key = item.substr(0, eq);
            const std::string value = item.substr(eq + 1);
            try {
                if (value.find('/') != std::string::npos) {
                    json arr = json::array();
                    std::stringstream vs(value);
                    std::string part;
                    while (std::getline(vs, part, '/')) arr.push_back(std::stod(part));
                    params[key] = arr;
                } else {
                    params[key] = std::stod(value);
                }
            } catch (const std::logic_error&) {
                throw ConfigError("dist: '" + value + "' is not a number");
            }
        }
    }
    return make_distribution(params_for(dist_kind_from_string(kind_name), params), true);
}

json dist_to_json(const ServiceDistribution& dist) {
    json p = json::object();
    std::visit(
        [&p](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, law::Exponential>) {
                p["rate"] = d.rate;
            } else if constexpr (std::is_same_v<T, law::Deterministic>) {
                p["value"] = d.value;
            } else if constexpr (std::is_same_v<T, law::Pareto>) {
                p["alpha"] = d.alpha;
                p["scale"] = d.scale;
            } else if constexpr (std::is_same_v<T, law::Uniform>) {
                p["low"] = d.low;
                p["high"] = d.high;
            } else if constexpr (std::is_same_v<T, law::HyperExponential>) {
                p["probs"] = d.probs;
                p["rates"] = d.rates;
            } else {
                p["mu"] = d.mu;
                p["sigma"] = d.sigma;
            }
        },
        dist.params());
    return json{{"kind", std::string(to_string(dist.kind()))}, {"params", p}, {"normalize", false}};
}

json config_to_json(const ScenarioConfig& c) {
    json j;
    j["scenario_id"] = c.scenario_id;
    j["n"] = c.n;
    j["lambda"] = c.lambda;
    j["dist"] = dist_to_json(c.dist);
    j["arrivals"] = c.arrivals.kind == ArrivalKind::poisson
                        ? json{{"kind", "poisson"}}
                        : json{{"kind", "renewal"}, {"law", dist_to_json(c.arrivals.base_law)}};
    json pol{{"kind", std::string(to_string(c.policy.kind))},
             {"idle_selection", std::string(to_string(c.policy.idle_selection))}};
    if (c.policy.kind == PolicyKind::jsq_d) pol["d"] = c.policy.d;
    if (c.policy.kind == PolicyKind::jiq_biased) {
        pol["lambda_bar"] = c.policy.lambda_bar;
        if (c.policy.bias_weights.empty()) {
            pol["bias_ratio"] = c.policy.bias_ratio;
        } else {
            pol["bias_weights"] = c.policy.bias_weights;
        }
    }
    if (c.policy.preferred_tag) pol["preferred_tag"] = *c.policy.preferred_tag;
    j["policy"] = pol;
    if (c.buffer > 0) j["buffer"] = c.buffer;
    j["horizon"] = c.horizon;
    j["warmup"] = c.warmup;
    if (c.grid.size() == 0) {
        j["grid"] = json::object();  // derived from lambda and the law
    } else {
        j["grid"] = json{{"levels", std::vector<double>(c.grid.points().begin(), c.grid.points().end())}};
    }
    j["sample_interval"] = c.sample_interval;
    j["tracked_servers"] = c.tracked_servers;
    j["seed"] = c.seed;
    if (!c.subsets.empty()) {
        json subs = json::array();
        for (const auto& s : c.subsets) subs.push_back({{"tag", s.tag}, {"size", s.size}});
        j["subsets"] = subs;
    }
    if (!c.initial.workloads.empty()) j["initial"] = json{{"workloads", c.initial.workloads}};
    j["event_budget"] = c.event_budget;
    return j;
}

std::vector<std::string> validate_config(const ScenarioConfig& c) {
    Checker ck;
    ck.require(valid_id(c.scenario_id), "scenario_id",
               "must be nonempty and use only letters, digits, '_', '-', '.'");
    ck.require(c.n >= 1, "n", "must be a positive integer");
    ck.require(std::isfinite(c.lambda) && c.lambda >= 0.0, "lambda", "must be finite and >= 0");
    ck.require(std::isfinite(c.horizon) && c.horizon >= 0.0, "horizon", "must be finite and >= 0");
    ck.require(std::isfinite(c.warmup) && c.warmup >= 0.0, "warmup", "must be >= 0");
    ck.require(!(c.warmup >= c.horizon) || c.horizon == 0.0, "warmup", "must be less than horizon");
    ck.require(std::isfinite(c.sample_interval) && c.sample_interval > 0.0, "sample_interval",
               "must be > 0");
    ck.require(c.grid.size() >= 1, "grid", "must contain at least w = 0");
    ck.require(c.event_budget > 0, "event_budget", "must be > 0");
    if (!c.subsets.empty()) {
        std::size_t total = 0;
        std::map<int, int> seen;
        for (const auto& s : c.subsets) {
            total += s.size;
            ck.require(s.size > 0, "subsets", "every subset needs a positive size");
            ck.require(++seen[s.tag] == 1, "subsets", "duplicate tag " + std::to_string(s.tag));
        }
        ck.require(total == c.n, "subsets", "sizes must sum to n");
    }
    if (c.policy.preferred_tag) {
        bool found = false;
        for (const auto& s : c.subsets) found = found || s.tag == *c.policy.preferred_tag;
        ck.require(found, "policy.preferred_tag", "no subset carries this tag");
    }
    ck.require(c.initial.workloads.empty() || c.initial.workloads.size() == c.n, "initial",
               "custom workload vector must have length n");
    for (double w : c.initial.workloads) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            ck.require(false, "initial", "workloads must be finite and >= 0");
            break;
        }
    }
    if (c.n >= 1) {
        ck.section("policy", [&] { validate_policy(c.policy, c.n, c.lambda); });
    }
    return ck.errors;
}

std::vector<std::string> config_warnings(const ScenarioConfig& c) {
    std::vector<std::string> w;
    if (c.lambda >= 0.5) {
        w.push_back("lambda = " + std::to_string(c.lambda) +
                    " >= 1/2: concentration at the equilibrium point is only conjectured here; "
                    "treating the run as exploratory");
    }
    if (c.lambda >= 1.0) {
        w.push_back("lambda >= 1: the system is not subcritical; no equilibrium point exists");
    }
    if (!c.dist.finite_variance()) {
        w.push_back("service law has infinite variance: total-workload statistics are not reported");
    }
    if (c.policy.idle_selection == IdleSelection::lifo && c.tracked_servers >= 2) {
        w.push_back("lifo idle selection: server labels are not exchangeable; independence "
                    "statistics are exploratory");
    }
    return w;
}

ParsedConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("parse error: top level must be an object");
    Checker ck;
    for (const auto& item : doc.items()) {
        const auto& keys = known_keys();
        ck.require(std::find(keys.begin(), keys.end(), item.key()) != keys.end(), item.key(),
                   "unknown key");
    }

    ScenarioConfig c;
    ck.section("scenario_id", [&] { c.scenario_id = doc.value("scenario_id", c.scenario_id); });
    ck.section("n", [&] {
        if (!doc.contains("n")) throw ConfigError("required");
        const auto& v = doc.at("n");
        if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
            throw ConfigError("must be a positive integer");
        }
        c.n = v.get<std::size_t>();
    });
    ck.section("lambda", [&] {
        if (!doc.contains("lambda")) throw ConfigError("required");
        c.lambda = number_at(doc, "lambda", 0.0);
    });
    ck.section("dist", [&] {
        if (doc.contains("dist")) c.dist = parse_dist_spec(doc.at("dist"));
    });
    ck.section("arrivals", [&] {
        if (!doc.contains("arrivals")) return;
        const auto& a = doc.at("arrivals");
        const std::string kind = a.value("kind", "poisson");
        if (kind == "poisson") {
            c.arrivals = ArrivalSpec{};
        } else if (kind == "renewal") {
            if (!a.contains("law")) throw ConfigError("renewal arrivals need a 'law'");
            // Shape of A only; it is rescaled to mean 1/lambda.
            ServiceDistribution law = parse_dist_spec(a.at("law"));
            c.arrivals = ArrivalSpec{ArrivalKind::renewal, law.scaled(1.0 / law.mean())};
        } else {
            throw ConfigError("kind must be 'poisson' or 'renewal'");
        }
    });
    ck.section("policy", [&] {
        if (!doc.contains("policy")) return;
        const auto& p = doc.at("policy");
        if (p.is_string()) {
            c.policy.kind = policy_kind_from_string(p.get<std::string>());
            return;
        }
        c.policy.kind = policy_kind_from_string(p.value("kind", "jiq"));
        c.policy.d = p.value("d", c.policy.d);
        c.policy.idle_selection = idle_selection_from_string(p.value("idle_selection", "uniform"));
        c.policy.lambda_bar = number_at(p, "lambda_bar", c.policy.lambda_bar);
        c.policy.bias_ratio = number_at(p, "bias_ratio", c.policy.bias_ratio);
        c.policy.bias_weights = numbers_at(p, "bias_weights");
        if (p.contains("preferred_tag")) c.policy.preferred_tag = p.at("preferred_tag").get<int>();
    });
    ck.section("buffer", [&] {
        if (!doc.contains("buffer") || doc.at("buffer").is_null()) return;
        const auto& v = doc.at("buffer");
        if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
            throw ConfigError("must be a positive integer");
        }
        c.buffer = v.get<std::uint32_t>();
    });
    ck.section("horizon", [&] { c.horizon = number_at(doc, "horizon", c.horizon); });
    c.warmup = 0.25 * c.horizon;
    ck.section("warmup", [&] { c.warmup = number_at(doc, "warmup", c.warmup); });
    ck.section("sample_interval",
               [&] { c.sample_interval = number_at(doc, "sample_interval", c.sample_interval); });
    ck.section("tracked_servers", [&] {
        c.tracked_servers = doc.value("tracked_servers", c.tracked_servers);
    });
    ck.section("seed", [&] { c.seed = doc.value("seed", c.seed); });
    ck.section("event_budget", [&] { c.event_budget = doc.value("event_budget", c.event_budget); });
    ck.section("subsets", [&] {
        if (!doc.contains("subsets")) return;
        for (const auto& s : doc.at("subsets")) {
            c.subsets.push_back({s.at("tag").get<int>(), s.at("size").get<std::size_t>()});
        }
    });
    ck.section("initial", [&] {
        if (!doc.contains("initial")) return;
        const auto& init = doc.at("initial");
        if (init.is_string()) {
            if (init.get<std::string>() != "all_idle") throw ConfigError("expected 'all_idle'");
            return;
        }
        if (init.contains("workloads")) {
            c.initial.workloads = numbers_at(init, "workloads");
        } else if (init.contains("per_tag")) {
            // {"per_tag": {"<tag>": workload}}: every server of the tag starts at that workload.
            std::vector<double> w;
            const auto& per_tag = init.at("per_tag");
            for (const auto& s : c.subsets) {
                const std::string key = std::to_string(s.tag);
                const double v = per_tag.contains(key) ? per_tag.at(key).get<double>() : 0.0;
                w.insert(w.end(), s.size, v);
            }
            if (c.subsets.empty()) throw ConfigError("per_tag needs 'subsets'");
            c.initial.workloads = std::move(w);
        } else {
            throw ConfigError("expected 'all_idle', {workloads: [...]} or {per_tag: {...}}");
        }
    });
    const bool grid_explicit = doc.contains("grid");
    ck.section("grid", [&] {
        const json g = doc.value("grid", json::object());
        if (g.contains("levels")) {
            c.grid = WorkloadGrid(numbers_at(g, "levels"));
            return;
        }
        const auto points = g.value("points", std::size_t{201});
        const double first = number_at(g, "first_step", 0.05);
        if (g.contains("w_max")) {
            const double w_max = number_at(g, "w_max", 10.0);
            c.grid = g.value("spacing", std::string("uniform")) == "geometric"
                         ? WorkloadGrid::geometric(w_max, points, first)
                         : WorkloadGrid::uniform(w_max, points);
        } else {
            c.grid = default_grid(std::min(std::max(c.lambda, 0.0), 0.999), c.dist, points, first);
        }
    });

    // Cross-field checks, skipping keys already reported and, when n itself is
    // bad, the checks that depend on it.
    std::set<std::string> failed;
    for (const auto& e : ck.errors) failed.insert(e.substr(0, e.find(':')));
    const bool n_failed = failed.count("n") > 0;
    for (auto& e : validate_config(c)) {
        const std::string key = e.substr(0, e.find(':'));
        const bool depends_on_n = key == "subsets" || key == "initial" || key.rfind("policy", 0) == 0;
        if (failed.count(key) == 0 && !(n_failed && depends_on_n)) ck.errors.push_back(std::move(e));
    }
    if (!ck.errors.empty()) throw ConfigValidationError(ck.errors);
    return ParsedConfig{c, config_warnings(c), grid_explicit && !doc.at("grid").empty()};
}

ParsedConfig parse_config_text(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("parse error: ") + e.what());
    }
    return parse_config(doc);
}

ParsedConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace jiqlab

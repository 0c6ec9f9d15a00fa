#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "jiqlab/error.hpp"
#include "jiqlab/scenario.hpp"

namespace jiqlab {

// Validation failure listing every offending key.
class ConfigValidationError : public ConfigError {
public:
    explicit ConfigValidationError(std::vector<std::string> violations);
    const std::vector<std::string>& violations() const { return violations_; }

private:
    std::vector<std::string> violations_;
};

struct ParsedConfig {
    ScenarioConfig config;
    std::vector<std::string> warnings;
    bool grid_explicit = false;  // false: grid was derived from lambda and dist
};

// Parses and validates a scenario description. Unset keys take defaults:
// warmup = 0.25 * horizon, tracked_servers = 2, default grid. Throws ConfigError
// (malformed input) or ConfigValidationError (all violations at once).
ParsedConfig parse_config(const nlohmann::json& doc);
ParsedConfig parse_config_text(std::string_view text);
ParsedConfig parse_config_file(const std::filesystem::path& path);

// Re-validates an in-memory config (used after command-line overrides).
std::vector<std::string> validate_config(const ScenarioConfig& config);
std::vector<std::string> config_warnings(const ScenarioConfig& config);

// {"kind": ..., "params": {...}, "normalize": bool}
ServiceDistribution parse_dist_spec(const nlohmann::json& spec);
// "pareto:alpha=1.5,scale=1" style shorthand; lists use '/' separators
// ("hyperexponential:probs=0.5/0.5,rates=2/0.667"). Always normalized.
ServiceDistribution parse_dist_shorthand(std::string_view text);

nlohmann::json dist_to_json(const ServiceDistribution& dist);
nlohmann::json config_to_json(const ScenarioConfig& config);

}  // namespace jiqlab

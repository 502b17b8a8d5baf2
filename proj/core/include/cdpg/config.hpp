#pragma once

#include "cdpg/scenarios.hpp"

namespace cdpg {

/// All schema violations found in a config file, collected in one pass.
struct ConfigError : std::runtime_error {
    std::vector<std::string> issues;
    explicit ConfigError(std::vector<std::string> found);
};

struct RunSettings {
    long max_iters = 100000;
    double tol = 1e-8;
    double safety = 1.0;
    long record_every = 100;
    int workers = 1;
    std::uint64_t seed = 0;
};

struct LoadedConfig {
    ScenarioSpec scenario;
    RunSettings run;
};

/// Parses the JSON config document (sections network / agents / coupling /
/// weights / run). Unknown keys are rejected; every violation is reported,
/// not just the first. `origin` labels diagnostics (usually the file path).
LoadedConfig parse_config_text(const std::string& text, const std::string& origin);

/// File-reading wrapper around parse_config_text.
LoadedConfig parse_config(const std::string& path);

/// Serializes a scenario plus run settings back to the config JSON; the
/// result round-trips through parse_config_text.
std::string export_config(const ScenarioSpec& scenario, const RunSettings& run);

}  // namespace cdpg

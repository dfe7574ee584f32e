#pragma once

#include <string>

#include "nakasim/simulation.hpp"

namespace nakasim {

struct ScenarioFile {
    ScenarioConfig cfg;
    std::string out_dir;  // empty: the CLI flag decides
};

// JSON scenario; errors are ConfigError with the offending field path.
ScenarioFile parse_scenario(const std::string& text);
ScenarioFile load_scenario(const std::string& path);
std::string scenario_to_json(const ScenarioConfig& cfg);

}  // namespace nakasim

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pollreg/parameters.hpp"

// Scenario files are JSON with 1-based station indices; // comments are
// allowed and ignored. See scenarios/sample_scenario.json for a
// commented example of every field.

namespace pollreg {

// Parse and serialization errors carry a JSON-pointer-like field path.
ScenarioSpec parse_scenario(const nlohmann::json& j);
ScenarioSpec load_scenario_file(const std::string& path);
nlohmann::json scenario_to_json(const ScenarioSpec& spec);

// Optional sweep section: vary one atom weight of a two-sided measure over
// a grid, renormalizing the remaining atoms proportionally.
struct SweepSpec {
  StationPair pair{0, 0};
  int atom = 0;
  std::vector<double> grid;
};

std::optional<SweepSpec> sweep_of(const nlohmann::json& j);
ScenarioSpec with_sweep_value(ScenarioSpec spec, const SweepSpec& sweep,
                              double value);

// Built-in two-station example: one station always serves at rate 2, the
// other draws rate 5/4 with probability p and rate 5 otherwise; all arrival
// rates are one, switching defaults to zero. Phase boundaries sit at
// p = 1/5 and p = 1/2.
ScenarioSpec example_scenario(
    double p, SwitchingDistribution switching = SwitchingDistribution{});

// Default sweep for the built-in example: the mixture weight p.
SweepSpec example_sweep(std::vector<double> grid);

}  // namespace pollreg

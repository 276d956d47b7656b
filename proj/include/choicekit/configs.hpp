#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "choicekit/sensitivity.hpp"
#include "choicekit/simulate.hpp"

namespace choicekit {

// One requested sweep of a scenario config; `group` turns it into a paired
// group/complement evaluation.
struct SweepConfig {
  std::string label;
  SweepSpec sweep;
  std::optional<std::map<std::string, double>> group;
};

struct ScenarioConfig {
  std::string name;
  enum class BaselineMode { design, explicit_values };
  BaselineMode mode = BaselineMode::design;
  std::string design_ref = "reference";       // "reference" or a CSV path
  std::map<std::string, double> values;       // explicit baseline, raw units
  double ref_pivot_minutes = 30.0;
  int mixing_draws = 10000;
  std::uint64_t seed = 20210301;
  std::vector<SweepConfig> sweeps;
};

ScenarioConfig parse_scenario_config(const std::string& json_text, const AttributeSchema& schema);
ScenarioConfig load_scenario_config(const std::string& path, const AttributeSchema& schema);

Baseline scenario_baseline(const ScenarioConfig& cfg, const AttributeSchema& schema,
                           const ModelSpec& spec);

// Simulation config: design, population mix, the generating model and its
// true parameter values.
SimConfig parse_sim_config(const std::string& json_text, const AttributeSchema& schema);
SimConfig load_sim_config(const std::string& path, const AttributeSchema& schema);

}  // namespace choicekit

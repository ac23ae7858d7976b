#pragma once

#include "rflab/backward_heat.hpp"
#include "rflab/config.hpp"
#include "rflab/grid.hpp"
#include "rflab/model_flows.hpp"

namespace rflab {

// Flow of the scenario; DomainError from validation is rethrown as ConfigError.
FlowMetric build_flow(const ScenarioConfig& config);

Axis rho_axis(const GridSpec& grid);
Axis tau_axis(const GridSpec& grid);

// Catalog entry named `name` with the parameters of the heat section.
SolutionKind catalog_kind(const HeatConfig& heat, const std::string& name);

// Heat solution on the scenario grid (catalog) or on the solver grid covering
// [grid.tau_min, grid.tau_max] (numeric).
HeatSolution build_heat_solution(const FlowMetric& flow, const ScenarioConfig& config);

}  // namespace rflab

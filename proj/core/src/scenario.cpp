#include "rflab/scenario.hpp"

#include <memory>

#include "rflab/error.hpp"

namespace rflab {

FlowMetric build_flow(const ScenarioConfig& config) {
  try {
    return make_flow(config.model, config.scale, config.tau);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("config: invalid flow: ") + e.what());
  }
}

Axis rho_axis(const GridSpec& grid) { return make_axis(grid.rho_lo, grid.rho_hi, grid.rho_nodes); }
Axis tau_axis(const GridSpec& grid) { return make_axis(grid.tau_lo, grid.tau_hi, grid.tau_nodes); }

SolutionKind catalog_kind(const HeatConfig& heat, const std::string& name) {
  if (name == "constant") return heat::Constant{heat.value};
  if (name == "linear") return heat::LinearLine{heat.slope, heat.offset};
  if (name == "exp") return heat::ExpLine{heat.scale};
  if (name == "eigen") return heat::Eigen{heat.amplitude, heat.shift};
  throw ConfigError("config: unknown catalog solution '" + name + "'");
}

HeatSolution build_heat_solution(const FlowMetric& flow, const ScenarioConfig& config) {
  const GridSpec& g = config.grid;
  if (config.heat.solution != "numeric") {
    return exact_solution(flow, catalog_kind(config.heat, config.heat.solution), rho_axis(g),
                          tau_axis(g));
  }
  const auto exact = std::make_shared<CatalogSolution>(flow, catalog_kind(config.heat, config.heat.terminal));
  const double T = g.tau_hi;
  HeatSolveOptions opt;
  opt.nodes = config.heat.nodes;
  opt.tau_rows = g.tau_nodes;
  if (flow.model().is_line()) {
    opt.x_lo = -config.heat.window;
    opt.x_hi = config.heat.window;
  } else {
    opt.rho_max = config.heat.window;
  }
  opt.boundary_value = [exact](double rho, double tau) { return exact->value(rho, tau); };
  return solve_backward_heat(flow, [exact, T](double rho) { return exact->value(rho, T); }, T,
                             g.tau_lo, opt);
}

}  // namespace rflab

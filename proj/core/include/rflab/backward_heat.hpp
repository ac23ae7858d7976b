#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rflab/grid.hpp"
#include "rflab/model_flows.hpp"

namespace rflab {

namespace heat {
struct Constant {
  double value = 1.0;
};
// u = slope * x + offset on the flat line.
struct LinearLine {
  double slope = 1.0;
  double offset = 0.0;
};
// u = scale * exp(x - tau / a0^2) on the static flat line.
struct ExpLine {
  double scale = 1.0;
};
// u = amplitude * E(tau) cos(rho) + shift on a sphere, E' = (n / a^2) E, E(0) = 1.
struct Eigen {
  double amplitude = 1.0;
  double shift = 0.0;
};
}  // namespace heat

using SolutionKind = std::variant<heat::Constant, heat::LinearLine, heat::ExpLine, heat::Eigen>;

std::string kind_name(const SolutionKind& kind);

// Closed-form catalog entry bound to a flow. Evaluates u and its exact
// derivatives; throws DomainError if the kind does not fit the flow.
class CatalogSolution {
 public:
  CatalogSolution(const FlowMetric& flow, SolutionKind kind);

  double value(double rho, double tau) const;
  double d_rho(double rho, double tau) const;
  double d_rhorho(double rho, double tau) const;
  double d_tau(double rho, double tau) const;
  // Exact (Delta + d_tau) u from the analytic derivatives.
  double analytic_residual(double rho, double tau) const;
  // Same, with fourth-order differences of value() at step h.
  double fd_residual(double rho, double tau, double h = 1e-3) const;

  const SolutionKind& kind() const { return kind_; }
  const FlowMetric& flow() const { return flow_; }
  // E(tau) of the Eigen entry, 1 otherwise.
  double growth(double tau) const;

 private:
  FlowMetric flow_;
  SolutionKind kind_;
};

struct HeatSolution {
  Field2D u;                 // rho x tau
  std::string provenance;    // "catalog:<kind>" or "numeric"
  bool positive = false;     // min u > 0 on the grid
  double A = 0.0;            // sup u over the grid
  double abs_sup = 0.0;      // sup |u|
  double residual_max = 0.0;           // max |(Delta + d_tau) u| at interior nodes
  double analytic_residual_max = 0.0;  // catalog only
  double residual_tolerance = 0.0;     // what residual_max is measured against
  bool max_principle_ok = true;        // numeric only
  std::vector<double> sup_by_tau;      // sup |u| per tau row
  std::optional<SolutionKind> kind;
};

// Catalog solution sampled on the grid; residuals at interior nodes.
HeatSolution exact_solution(const FlowMetric& flow, const SolutionKind& kind, const Axis& rho,
                            const Axis& tau);

enum class BoundaryKind { Dirichlet, Neumann };

struct HeatSolveOptions {
  // Spatial nodes. Radial charts start at the pole; on the sphere the solver
  // always covers [0, pi] and `nodes` is the node count there, but the
  // returned field stops at the chart edge rho_max().
  int nodes = 401;
  double rho_max = 0.0;  // outer radius (non-compact radial), ignored on the sphere
  double x_lo = 0.0;     // window of the line
  double x_hi = 0.0;
  BoundaryKind boundary = BoundaryKind::Dirichlet;
  // Boundary data g(rho, tau) for Dirichlet windows.
  std::function<double(double, double)> boundary_value;
  double cfl = 0.9;
  int tau_rows = 11;  // output rows from tau_min to T inclusive
};

// Integrates du/dtau = -Delta u from tau = T down to tau_min with SSPRK3 on a
// finite-volume radial operator. Output rows land exactly on an even tau grid.
HeatSolution solve_backward_heat(const FlowMetric& flow,
                                 const std::function<double(double)>& terminal, double T,
                                 double tau_min, const HeatSolveOptions& options = {});

struct IdentityReport {
  double residual_f = 0.0;    // max |(Delta + d_tau) f + |grad f|^2|
  double residual_p = 0.0;    // max residual of the |grad f|^2 evolution identity
  double min_w_slack = 0.0;   // min slack of the w inequality
  double w_slack_fd_error = 0.0;
  std::size_t nodes_checked = 0;
  int worst_f_i = -1, worst_f_j = -1;
  int worst_p_i = -1, worst_p_j = -1;
  int worst_w_i = -1, worst_w_j = -1;
};

// Finite-difference check of the identities for f = log u and the inequality
// for w = |grad f|^2 / (1 - f)^2, at nodes two or more away from the grid edge.
// Requires u > 0 and sup f < 1 on the grid.
IdentityReport verify_f_w_identities(const FlowMetric& flow, const HeatSolution& sol);

}  // namespace rflab

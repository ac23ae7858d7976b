#pragma once

#include <array>
#include <string>
#include <vector>

#include "rflab/lgeodesic.hpp"
#include "rflab/model_flows.hpp"

namespace rflab {

// `Definition` assembles D = D0 + 2R. `Remark` uses D0 + R, the normalisation
// under which the static case reads D(V) = Ric(V, V).
enum class MullerConvention { Definition, Remark };

std::string to_string(MullerConvention c);
MullerConvention muller_convention_from_string(const std::string& s);

struct QuantitySample {
  // Terms of D(V) in order. The Laplacian, divergence and gradient slots are
  // identically zero on homogeneous flows but kept so reports show them.
  double minus_dtau_H = 0.0;
  double minus_laplace_H = 0.0;
  double minus_two_h_norm2 = 0.0;
  double four_div_h = 0.0;
  double minus_two_grad_H_V = 0.0;
  double two_ric_VV = 0.0;
  double minus_two_h_VV = 0.0;

  double D0 = 0.0;
  double R = 0.0;  // Ric(V,V) - h(V,V)
  double D = 0.0;
  double trace_harnack = 0.0;  // H(V), NaN at tau = 0
};

QuantitySample muller_d(const FlowMetric& flow, const SpaceTimePoint& p, double vmag,
                        MullerConvention convention = MullerConvention::Definition);

// H(V) = -dH/dtau - H/tau - 2 g(grad H, V) + 2 h(V, V).
double trace_harnack_h(const FlowMetric& flow, const SpaceTimePoint& p, double vmag);

struct PathIntegrals {
  double K_H = 0.0;
  double K_D = 0.0;
  double error = 0.0;
};

// K_H and K_D along a minimal geodesic. With s = sqrt(tau) and
// |X|^2 = c^2 / (tau a^2) the integrands become 2 s^4 Q(s^2).
PathIntegrals path_integrals(const FlowMetric& flow, const LGeodesic& geodesic,
                             MullerConvention convention = MullerConvention::Definition);
PathIntegrals path_integrals(const FlowMetric& flow, double first_integral, double tau_bar,
                             MullerConvention convention = MullerConvention::Definition,
                             double abs_tol = 1e-8);

inline constexpr std::array<double, 4> kDefaultVMagnitudes = {0.0, 0.5, 1.0, 2.0};

// Scalar scans of the structural hypotheses used by the estimates.
struct HypothesisScan {
  double K = 0.0;
  bool minus_k_super = false;  // R(V) >= -K |V|^2
  bool d_bound = false;        // D(V) >= -2K (H + |V|^2)
  bool trace_harnack = false;  // H(V) >= -H / tau
  bool h_nonnegative = false;  // H >= 0
  double min_R_slack = 0.0;
  double min_D_slack = 0.0;
  double min_harnack_slack = 0.0;
  double min_H = 0.0;
};

HypothesisScan scan_hypotheses(const FlowMetric& flow, double K, int tau_samples = 201,
                               std::vector<double> vmags = {kDefaultVMagnitudes.begin(),
                                                            kDefaultVMagnitudes.end()});

struct GridNode {
  int i = -1;
  int j = -1;
  double rho = 0.0;
  double tau = 0.0;
};

struct FormulaCheck {
  std::string name;
  bool equality = true;      // equality residual vs one-sided slack
  bool applicable = true;
  double worst = 0.0;        // max |residual|, or min slack
  double fd_error_at_worst = 0.0;
  double tolerance = 0.0;
  GridNode worst_node;
  bool pass = true;
  std::size_t nodes_checked = 0;
};

struct ExcludedNode {
  GridNode node;
  std::string reason;
};

struct FormulaReport {
  std::vector<FormulaCheck> checks;
  std::vector<ExcludedNode> excluded;
  double grad_dfrak_min = 0.0;
  double grad_dfrak_max = 0.0;
  bool pass = true;

  const FormulaCheck& check(const std::string& name) const;
};

struct FormulaOptions {
  double K = 0.0;  // K in the hypothesis D(V) >= -2K (H + |V|^2)
  double equality_tolerance = 1e-3;
  double inequality_floor = 1e-6;
  double grad_dfrak_bound = 3.0 + 1e-2;
  MullerConvention convention = MullerConvention::Definition;
  unsigned workers = 0;
};

// Finite-difference verification of the reduced-distance formulas on the
// interior of a reduced field. Node (i, j) is checked when the second-order
// stencil and its 2h Richardson partner fit (the pole counts as interior
// through the even extension).
FormulaReport verify_derivative_formulas(const FlowMetric& flow, const ReducedField& field,
                                         const FormulaOptions& options = {});

}  // namespace rflab

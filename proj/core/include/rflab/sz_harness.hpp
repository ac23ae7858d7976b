#pragma once

#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "rflab/backward_heat.hpp"
#include "rflab/lgeodesic.hpp"
#include "rflab/model_flows.hpp"

namespace rflab {

using Rational = boost::multiprecision::cpp_rational;

// Exact rational value of a finite double.
Rational exact_rational(double x);

// Smooth step: 1 on (-inf, 0], 0 on [1, inf), logistic(1/x - 1/(1-x)) between.
struct StepValue {
  double value;
  double d1;
  double d2;
};
StepValue smooth_step(double x);

// |S'| / S^p and |S''| / S^p evaluated without forming S^p (safe where S underflows).
double step_d1_quotient(double x, double p);
double step_d2_quotient(double x, double p);

struct CutoffCertification {
  int grid = 0;
  std::size_t points_checked = 0;  // grid points with psi > 1e-300
  double max_dr_quotient = 0.0;    // R   |d_r psi|   / psi^alpha
  double max_drr_quotient = 0.0;   // R^2 |d_rr psi|  / psi^alpha
  double max_dtau_quotient = 0.0;  // T   |d_tau psi| / psi^(1/2)
  bool plateau_ok = false;         // psi == 1 on [0, R/2] x [0, T/4]
  bool support_ok = false;         // psi == 0 once r >= R or tau >= T/2
  bool monotone_ok = false;        // d_r psi <= 0, and == 0 for r <= R/2
  bool pass = false;
};

// psi(r, tau) = eta(r) chi(tau) with eta(r) = S((r - R/2)/(R/2)) and
// chi(tau) = S((tau - T/4)/(T/4)).
class Cutoff {
 public:
  Cutoff(double R, double T);

  double R() const { return R_; }
  double T() const { return T_; }
  static constexpr double alpha = 0.75;

  double psi(double r, double tau) const;
  double d_r(double r, double tau) const;
  double d_rr(double r, double tau) const;
  double d_tau(double r, double tau) const;

  // Smallest constants valid for the profile, from a dense scan refined by
  // golden-section search.
  double C_alpha() const { return c_alpha_; }
  double C() const { return c_; }
  double sup_abs_dr() const { return sup_s1_ * 2.0 / R_; }

  const CutoffCertification& certification() const { return cert_; }
  void certify(int grid);

 private:
  double R_;
  double T_;
  double c_alpha_ = 0.0;
  double c_ = 0.0;
  double sup_s1_ = 0.0;  // sup |S'|
  CutoffCertification cert_;
};

// Builds and certifies on a grid x grid mesh of [0, R] x [0, T/2].
// Throws NumericalError if certification fails.
Cutoff build_cutoff(double R, double T, int grid = 2048);

struct EstimateConstants {
  int n = 0;
  double C_alpha = 0.0;
  double C = 0.0;
  Rational Cbar_exact;
  Rational Ctilde1_exact;
  Rational Ctilde2_exact;
  Rational c_exact;  // max of the three
  double Cbar = 0.0;
  double Ctilde1 = 0.0;
  double Ctilde2 = 0.0;
  double c = 0.0;
  double C_n = 0.0;  // c^(1/4)
};

EstimateConstants estimate_constants(int n, double C_alpha, double C);
EstimateConstants estimate_constants(int n, const Cutoff& cutoff);

struct EstimateNode {
  int i = -1;
  int j = -1;
  double rho = 0.0;
  double tau = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

struct EstimateReport {
  std::string status;  // "pass", "fail", "inapplicable"
  std::vector<std::string> reasons;
  double R = 0.0, T = 0.0, K = 0.0, A = 0.0;
  double C_n = 0.0;
  double scale_factor = 0.0;  // 1/R + 1/sqrt(T) + sqrt(K)
  std::string region = "dfrak <= R/2, 0 < tau <= T/4";
  std::size_t nodes_in_region = 0;
  std::size_t nodes_excluded = 0;
  bool region_truncated = false;  // Q_{R,T} reaches the grid edge
  double sup_u_on_QRT = 0.0;
  EstimateNode worst;
  double margin = 0.0;  // 1 - worst ratio
  std::vector<EstimateNode> nodes;
};

struct EstimateOptions {
  double ratio_tolerance = 1e-6;
  bool keep_nodes = false;
  unsigned workers = 0;
};

// Checks |grad u| / u <= C_n (1/R + 1/sqrt(T) + sqrt(K)) (1 + log(A/u)) over the
// grid nodes with dfrak <= R/2 and tau <= T/4. `sol` and `field` share axes.
EstimateReport gradient_estimate_check(const FlowMetric& flow, const HeatSolution& sol,
                                       const ReducedField& field, double R, double T, double K,
                                       double A, const EstimateConstants& constants,
                                       const EstimateOptions& options = {});

struct LiouvilleRow {
  double R = 0.0;
  double A_R = 0.0;  // sup u (positive case) or sup |u| (signed case) over Q_{R,R^2}
  double bound = 0.0;
  std::size_t nodes = 0;
  bool probe_inside = false;
};

struct LiouvilleReport {
  std::string mode;  // "positive" or "signed"
  std::string classification;  // "consistent-with-constant" or "growth-condition-violated"
  std::vector<LiouvilleRow> rows;
  double loglog_slope = 0.0;
  bool strictly_decreasing = false;
  SpaceTimePoint probe;
  double probe_dfrak = 0.0;
  double probe_grad_u = 0.0;
  double C_n = 0.0;
};

// Evaluates the bounds of the Liouville argument along R_list. The positive
// mode is used when the solution is positive on the grid.
LiouvilleReport liouville_sweep(const FlowMetric& flow, const HeatSolution& sol,
                                const ReducedField& field, const std::vector<double>& R_list,
                                const SpaceTimePoint& probe, const EstimateConstants& constants);

}  // namespace rflab

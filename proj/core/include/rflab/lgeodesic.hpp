#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rflab/grid.hpp"
#include "rflab/model_flows.hpp"

namespace rflab {

inline constexpr std::size_t kMinCurveKnots = 16;

// Space-time curve from the base point, sampled at tau knots in (0, tau_bar].
// The point (rho = 0, tau = 0) is implied. Interpolation happens in s = sqrt(tau):
// order 1 is piecewise linear in s, order 3 a cubic spline in s.
struct SampledCurve {
  std::vector<double> tau;
  std::vector<double> rho;
  int order = 3;
};

struct LGeodesic {
  SampledCurve curve;
  std::vector<double> tangent;  // d rho / d tau at the knots
  double l_length = 0.0;
  double v_inf = 0.0;           // lim sqrt(tau) d rho/d tau as tau -> 0
  double first_integral = 0.0;  // sqrt(tau) a^2 d rho/d tau
  double first_integral_drift = 0.0;
  std::string method;

  double tau_bar() const { return curve.tau.back(); }
  double rho_bar() const { return curve.rho.back(); }
};

// L-length of a sampled curve, integrated in s = sqrt(tau) to absolute 1e-9.
double l_length(const FlowMetric& flow, const SampledCurve& curve);

// Curve with rho linear in s, ending at the target.
SampledCurve straight_curve(const SpaceTimePoint& target, std::size_t knots = 64);

struct GeodesicOptions {
  std::size_t knots = 64;
  double ode_tol = 1e-12;
};

// Integrates the radial L-geodesic equation in s = sqrt(tau):
//   rho_s = sigma,  sigma_s = -4 s (a'/a) sigma,  sigma(0) = 2 v_inf,
// together with the running L-length.
LGeodesic integrate_l_geodesic(const FlowMetric& flow, double v_inf, double tau_bar,
                               const GeodesicOptions& options = {});

// I = int_0^tau dtau / (sqrt(tau) a^2),  J = int_0^tau sqrt(tau) H dtau.
// On a homogeneous flow the minimal geodesic to (rho, tau) has first integral
// rho / I and L-length J + rho^2 / I.
struct RadialIntegrals {
  double I = 0.0;
  double J = 0.0;
};
RadialIntegrals radial_integrals(const FlowMetric& flow, double tau_bar);

// Minimal L-geodesic through the first integral.
LGeodesic solve_minimal_l_geodesic(const FlowMetric& flow, const SpaceTimePoint& target,
                                   const GeodesicOptions& options = {});

struct ShootingOptions {
  int starts = 3;
  std::uint64_t seed = 0;
  int max_iterations = 60;
  double tolerance = 1e-10;
  GeodesicOptions geodesic;
};

struct ShootingResult {
  LGeodesic geodesic;             // lowest L among the converged starts
  std::vector<double> roots;      // distinct converged v_inf values
  std::vector<double> lengths;    // L for each root
  bool smooth = true;             // false if two distinct roots tie in L within 1e-6
};

// Damped secant shooting on v_inf with seeded multi-start.
ShootingResult shoot_minimal_l_geodesic(const FlowMetric& flow, const SpaceTimePoint& target,
                                        const ShootingOptions& options = {});

// Endpoint-fixed descent of the L-length discretised as piecewise linear in s.
// Throws NumericalError if the budget runs out without any descent.
LGeodesic variational_refine(const FlowMetric& flow, const SampledCurve& curve,
                             int iterations = 4000);

// Discretised L-length used by variational_refine (exact for order-1 curves).
double discrete_l_length(const FlowMetric& flow, const SampledCurve& curve);

struct ReducedNode {
  double rho = 0.0;
  double tau = 0.0;
  double L = 0.0;
  double ell = 0.0;
  double Lbar = 0.0;
  double dfrak = 0.0;
  double first_integral = 0.0;  // c of the minimal geodesic
  double shooting_gap = 0.0;    // |L_shoot - L| / max(1, |L|), 0 when multistart is off
  bool smooth = true;
  std::string status = "ok";
};

struct ReducedField {
  Axis rho;
  Axis tau;
  std::vector<ReducedNode> nodes;  // rho index fastest

  const ReducedNode& at(int i, int j) const {
    return nodes[static_cast<std::size_t>(j) * rho.count + i];
  }
  Field2D ell() const;
  Field2D Lbar() const;
  Field2D dfrak() const;
};

struct ReducedFieldOptions {
  bool multistart = true;
  ShootingOptions shooting;
  unsigned workers = 0;
};

ReducedField reduced_field(const FlowMetric& flow, const Axis& rho, const Axis& tau,
                           const ReducedFieldOptions& options = {});

}  // namespace rflab

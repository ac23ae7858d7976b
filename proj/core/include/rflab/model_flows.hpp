#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rflab/cubic_spline.hpp"

namespace rflab {

// Sectional curvature sign of the unit model g0.
enum class Curvature : int { Hyperbolic = -1, Flat = 0, Sphere = 1 };

inline int sign(Curvature k) { return static_cast<int>(k); }
std::string to_string(Curvature k);

struct ModelSpaceSpec {
  int dimension = 2;
  Curvature curvature = Curvature::Flat;

  // n = 1 is only modelled as the flat line with a signed coordinate.
  bool is_line() const { return dimension == 1; }
};

// Largest admissible radius on the sphere; keeps minimal geodesics unique.
inline constexpr double kSphereCutMargin = 0.1;

namespace scale {
struct Static {};
struct BackwardRicci {};
struct BackwardKRicci {
  double K = 0.0;
};
struct Tabulated {
  std::vector<double> tau;
  std::vector<double> a;
};
}  // namespace scale

using ScaleVariant =
    std::variant<scale::Static, scale::BackwardRicci, scale::BackwardKRicci, scale::Tabulated>;

struct ScaleFlowSpec {
  ScaleVariant variant = scale::Static{};
  double a0 = 1.0;  // ignored by Tabulated
};

struct TauDomain {
  double lo = 0.0;
  double hi = 1.0;
  bool contains(double tau) const { return tau >= lo && tau <= hi; }
};

// Scale factor a(tau) and its first two derivatives.
struct ScaleState {
  double a;
  double da;
  double dda;
};

// Geometry of g(tau) = a(tau)^2 g0 at one instant. Quantities carrying
// "_unit" are the eigenvalue of the tensor on g(tau)-unit vectors.
struct MetricSample {
  double tau;
  double a;
  double da;
  double dda;
  double H;             // tr h = n a'/a
  double dH;            // d/dtau H
  double ric_unit;      // (n-1) kappa / a^2
  double h_unit;        // a'/a
  double h_norm2;       // |h|^2 = n (a'/a)^2
  double grad_h_radial;  // zero on homogeneous flows
  double scalar;        // S = n ric_unit
};

struct SpaceTimePoint {
  double rho;  // g0-geodesic radius (signed coordinate on the line)
  double tau;
};

class FlowMetric {
 public:
  const ModelSpaceSpec& model() const { return model_; }
  const ScaleFlowSpec& scale() const { return scale_; }
  const TauDomain& domain() const { return domain_; }
  int dimension() const { return model_.dimension; }
  int kappa() const { return sign(model_.curvature); }

  bool is_tabulated() const;
  bool is_static() const;
  // K for BackwardKRicci, 0 for BackwardRicci, empty for other variants.
  std::optional<double> k_ricci_constant() const;
  // Consistency tolerance of sample values: 1e-10 closed form, 1e-6 spline.
  double sample_tolerance() const { return is_tabulated() ? 1e-6 : 1e-10; }

  // Domain-checked geometry sample.
  MetricSample sample(double tau) const;
  // Scale profile without the domain check; used by quadrature nodes and
  // finite differences that may step slightly outside [lo, hi]. Throws only
  // when a^2 <= 0 or outside a tabulated range.
  ScaleState raw_scale(double tau) const;
  MetricSample raw_sample(double tau) const;

  // Chart bounds of the geodesic-polar (or line) coordinate.
  double rho_min() const;
  double rho_max() const;
  bool in_chart(double rho) const;

  friend FlowMetric make_flow(const ModelSpaceSpec&, const ScaleFlowSpec&, TauDomain);

 private:
  ModelSpaceSpec model_;
  ScaleFlowSpec scale_;
  TauDomain domain_;
  // a^2 obeys (a^2)' = 2 alpha + 2 beta a^2 for every closed-form variant.
  double alpha_ = 0.0;
  double beta_ = 0.0;
  CubicSpline spline_;
};

FlowMetric make_flow(const ModelSpaceSpec& model, const ScaleFlowSpec& scale, TauDomain domain);

MetricSample metric_sample(const FlowMetric& flow, double tau);

// sn'_k(rho) / sn_k(rho): cot, 1/rho, coth for kappa = +1, 0, -1.
double cot_kappa(int kappa, double rho);
// sn_k(rho).
double sn_kappa(int kappa, double rho);

// Laplace-Beltrami of a radial field from its radial derivatives.
// At rho = 0 (n >= 2) the even-extension limit n u''/a^2 is used and u'(0)
// must vanish.
double laplace_beltrami_radial(const FlowMetric& flow, double tau, double rho, double u_rho,
                               double u_rhorho);

// Same, with derivatives of a radial function taken by fourth-order central
// differences (step `h`).
double laplace_beltrami_radial(const FlowMetric& flow, const std::function<double(double)>& u,
                               double tau, double rho, double h = 1e-3);

struct AdmissibilitySample {
  double tau;
  double c_tau;  // smallest c >= 0 with h >= -c g on [0, tau]
};

struct ClassificationReport {
  double K = 0.0;
  double tolerance = 0.0;
  bool super_ricci = false;           // Ric >= h
  bool super_ricci_equality = false;  // Ric == h
  bool minus_k_super_ricci = false;   // Ric >= h - K g
  bool minus_k_equality = false;
  bool h_nonnegative = false;  // H >= 0
  double min_super_residual = 0.0;    // min (ric - h)
  double min_minus_k_residual = 0.0;  // min (ric - h + K)
  double min_H = 0.0;
  std::vector<AdmissibilitySample> admissibility;
};

ClassificationReport classify_flow(const FlowMetric& flow, double K, int tau_samples = 201);

}  // namespace rflab

#pragma once

#include <cstdint>
#include <memory>
#include <functional>
#include <string>
#include <vector>

#include "rflab/model_flows.hpp"

namespace rflab {

// sigma(s) = -log(1 - 2Ks) / (2K) on J = {1 - 2Ks > 0}; identity when K = 0.
double sigma_eval(double K, double s);
// sigma^{-1}(t) = (1 - exp(-2Kt)) / (2K).
double sigma_inv(double K, double t);
// sigma'(s) = 1 / (1 - 2Ks), which equals exp(2K sigma(s)).
double sigma_derivative(double K, double s);

struct SigmaCheck {
  double K = 0.0;
  std::size_t samples = 0;
  double max_inverse_error = 0.0;     // |sigma(sigma^{-1}(t)) - t|
  double max_derivative_error = 0.0;  // |sigma'(s) - exp(2K sigma(s))| / sigma'(s)
  double max_fd_derivative_error = 0.0;  // complex-step derivative vs exp(2K sigma)
};
SigmaCheck sigma_pair_check(double K, std::size_t samples = 10000, std::uint64_t seed = 0);

// Forward-time homogeneous flow g(t) = a(t)^2 g0 in its own t parameter.
class ForwardFlow {
 public:
  int dimension() const { return n_; }
  int kappa() const { return kappa_; }
  double t_lo() const { return t_lo_; }
  double t_hi() const { return t_hi_; }

  ScaleState scale(double t) const;
  double scalar(double t) const;     // S = n(n-1)kappa / a^2
  double d_scalar(double t) const;   // dS/dt = -2 S a'/a
  double ric_unit(double t) const;   // (n-1) kappa / a^2

  // Residual of a a' + (n-1) kappa - K a^2 (zero for a K-Ricci flow).
  double k_ricci_residual(double K, double t) const;

  friend ForwardFlow make_forward_k_ricci(int, Curvature, double, double, double, double);
  friend ForwardFlow make_forward_tabulated(int, Curvature, std::vector<double>,
                                            std::vector<double>);

 private:
  int n_ = 2;
  int kappa_ = 1;
  double t_lo_ = 0.0;
  double t_hi_ = 0.0;
  std::function<ScaleState(double)> profile_;
};

// Closed-form K-Ricci flow: (a^2)' = 2K a^2 - 2(n-1)kappa, a(0) = a0.
ForwardFlow make_forward_k_ricci(int n, Curvature curvature, double K, double a0, double t_lo,
                                 double t_hi);
// Spline-interpolated forward profile over its table range.
ForwardFlow make_forward_tabulated(int n, Curvature curvature, std::vector<double> t,
                                   std::vector<double> a);

// First t > 0 where a^2 of the closed-form K-Ricci flow reaches zero (inf if never).
double k_ricci_extinction_time(int n, Curvature curvature, double K, double a0);

// g_bar(s) = exp(-2K sigma(s)) g(sigma(s)).
class TransformedFlow {
 public:
  TransformedFlow(ForwardFlow source, double K);

  double K() const { return K_; }
  double s_lo() const { return s_lo_; }
  double s_hi() const { return s_hi_; }
  const ForwardFlow& source() const { return source_; }

  ScaleState scale(double s) const;
  // Back to the source: a(t) = exp(Kt) a_bar(sigma^{-1}(t)).
  double source_scale(double t) const;

 private:
  ForwardFlow source_;
  double K_;
  double s_lo_;
  double s_hi_;
};

struct TransformReport {
  double K = 0.0;
  double source_residual = 0.0;       // max K-Ricci scalar residual of the source
  double ricci_residual_fd = 0.0;     // max |d_s(a_bar^2) + 2(n-1)kappa| by differences
  double ricci_residual_exact = 0.0;  // same with the analytic derivative
  double round_trip_error = 0.0;      // max |a(t) - exp(Kt) a_bar(sigma^{-1}(t))| / a(t)
  double initial_mismatch = 0.0;      // |a_bar(s(t_lo)) e^{K t_lo} - a(t_lo)|
  std::size_t samples = 0;
  bool pass = false;
};

// Throws DomainError if the source fails the K-Ricci scalar test beyond 1e-8.
TransformedFlow transform_to_ricci_flow(const ForwardFlow& source, double K);
TransformReport check_transform(const TransformedFlow& flow, int samples = 201);

struct HarnackSample {
  double t = 0.0;
  double v = 0.0;
  double lhs = 0.0;
};

struct HarnackReport {
  std::string status;  // "pass", "fail", "skipped"
  std::string variant;  // "finite-time" or "ancient"
  double K = 0.0;
  double min_lhs = 0.0;
  double worst_t = 0.0;
  double worst_v = 0.0;
  std::size_t samples = 0;
  std::vector<HarnackSample> rows;
};

// d_t S + 2KS / (1 - e^{-2Kt}) - 2 g(grad S, V) + 2 Ric(V, V) on t > 0
// (1/t in place of the fraction when K = 0). Hyperbolic flows are skipped.
HarnackReport k_trace_harnack_check(const ForwardFlow& flow, double K,
                                    const std::vector<double>& t_grid,
                                    const std::vector<double>& vmags);
// Ancient form on t <= 0: d_t S + 2KS + 2Ric(V,V) for K > 0, d_t S + 2Ric(V,V) for K <= 0.
HarnackReport k_ancient_harnack_check(const ForwardFlow& flow, double K,
                                      const std::vector<double>& t_grid,
                                      const std::vector<double>& vmags);

struct KfrdvReport {
  double K = 0.0;
  double evolution_residual = 0.0;  // max |d_tau S + Delta S + 2|Ric|^2 + 2KS|
  double d_identity_residual = 0.0; // max |D(V) + 2K(H + |V|^2)|
  double trace_residual = 0.0;      // max |H - S - nK|
  std::size_t samples = 0;
  double tolerance = 1e-8;
  bool pass = false;
};

// For BackwardKRicci (and BackwardRicci read as K = 0) flows.
KfrdvReport kfrdv_check(const FlowMetric& flow, const std::vector<double>& vmags,
                        int tau_samples = 101);

}  // namespace rflab

#include "rflab/model_flows.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rflab/error.hpp"
#include "rflab/grid.hpp"

namespace rflab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// expm1(x)/x with the removable singularity filled in.
double expm1_ratio(double x) { return std::abs(x) < 1e-300 ? 1.0 : std::expm1(x) / x; }

}  // namespace

std::string to_string(Curvature k) {
  switch (k) {
    case Curvature::Hyperbolic: return "hyperbolic";
    case Curvature::Flat: return "flat";
    case Curvature::Sphere: return "sphere";
  }
  return "unknown";
}

bool FlowMetric::is_tabulated() const {
  return std::holds_alternative<scale::Tabulated>(scale_.variant);
}

bool FlowMetric::is_static() const {
  return std::holds_alternative<scale::Static>(scale_.variant);
}

std::optional<double> FlowMetric::k_ricci_constant() const {
  if (std::holds_alternative<scale::BackwardRicci>(scale_.variant)) return 0.0;
  if (const auto* k = std::get_if<scale::BackwardKRicci>(&scale_.variant)) return k->K;
  return std::nullopt;
}

ScaleState FlowMetric::raw_scale(double tau) const {
  if (is_tabulated()) {
    if (tau < spline_.front() - 1e-12 || tau > spline_.back() + 1e-12) {
      throw DomainError("tabulated scale profile evaluated outside its table");
    }
    const SplineValue v = spline_.evaluate(tau);
    if (!(v.value > 0.0)) throw DomainError("tabulated scale profile is not positive");
    return {v.value, v.first, v.second};
  }
  const double y0 = scale_.a0 * scale_.a0;
  const double y = y0 * std::exp(2.0 * beta_ * tau) + 2.0 * alpha_ * tau * expm1_ratio(2.0 * beta_ * tau);
  if (!(y > 0.0)) throw DomainError("scale factor a^2 is not positive at tau = " + std::to_string(tau));
  const double a = std::sqrt(y);
  const double da = (alpha_ + beta_ * y) / a;
  const double dda = (2.0 * beta_ * a * da - da * da) / a;
  return {a, da, dda};
}

MetricSample FlowMetric::raw_sample(double tau) const {
  const ScaleState s = raw_scale(tau);
  const int n = model_.dimension;
  MetricSample m{};
  m.tau = tau;
  m.a = s.a;
  m.da = s.da;
  m.dda = s.dda;
  m.h_unit = s.da / s.a;
  m.H = n * m.h_unit;
  m.dH = n * (s.dda / s.a - m.h_unit * m.h_unit);
  m.ric_unit = (n - 1) * kappa() / (s.a * s.a);
  m.h_norm2 = n * m.h_unit * m.h_unit;
  m.grad_h_radial = 0.0;
  m.scalar = n * m.ric_unit;
  return m;
}

MetricSample FlowMetric::sample(double tau) const {
  if (!domain_.contains(tau)) {
    throw DomainError("tau = " + std::to_string(tau) + " outside the flow domain [" +
                      std::to_string(domain_.lo) + ", " + std::to_string(domain_.hi) + "]");
  }
  return raw_sample(tau);
}

double FlowMetric::rho_min() const {
  return model_.is_line() ? -std::numeric_limits<double>::infinity() : 0.0;
}

double FlowMetric::rho_max() const {
  if (model_.curvature == Curvature::Sphere) return std::numbers::pi - kSphereCutMargin;
  return std::numeric_limits<double>::infinity();
}

bool FlowMetric::in_chart(double rho) const {
  if (!std::isfinite(rho)) return false;
  if (model_.is_line()) return true;
  return std::abs(rho) <= rho_max() + 1e-12;
}

FlowMetric make_flow(const ModelSpaceSpec& model, const ScaleFlowSpec& scale, TauDomain domain) {
  if (model.dimension < 1) throw DomainError("model dimension must be >= 1");
  if (model.dimension == 1 && model.curvature != Curvature::Flat) {
    throw DomainError("n = 1 supports only the flat line (kappa = 0)");
  }
  if (!(domain.lo >= 0.0) || !(domain.hi > domain.lo)) {
    throw DomainError("tau domain must be a non-degenerate interval in [0, inf)");
  }

  FlowMetric flow;
  flow.model_ = model;
  flow.scale_ = scale;
  flow.domain_ = domain;
  const double curvature_term = (model.dimension - 1) * sign(model.curvature);

  std::visit(Overloaded{
                 [&](const scale::Static&) {},
                 [&](const scale::BackwardRicci&) { flow.alpha_ = curvature_term; },
                 [&](const scale::BackwardKRicci& k) {
                   if (!(k.K >= 0.0)) throw DomainError("BackwardKRicci requires K >= 0");
                   flow.alpha_ = curvature_term;
                   flow.beta_ = k.K;
                 },
                 [&](const scale::Tabulated& t) {
                   if (t.tau.size() != t.a.size()) throw DomainError("tabulated profile size mismatch");
                   for (double a : t.a) {
                     if (!(a > 0.0)) throw DomainError("tabulated profile must be strictly positive");
                   }
                   flow.spline_ = CubicSpline(t.tau, t.a);
                   if (domain.lo < t.tau.front() - 1e-12 || domain.hi > t.tau.back() + 1e-12) {
                     throw DomainError("tau domain exceeds the tabulated range");
                   }
                 },
             },
             scale.variant);

  if (!flow.is_tabulated() && !(scale.a0 > 0.0)) throw DomainError("a0 must be positive");

  // a^2 is monotone in tau for the closed-form variants, so checking the two
  // ends certifies positivity on the whole domain.
  if (!flow.is_tabulated()) {
    for (double tau : {domain.lo, domain.hi}) {
      try {
        (void)flow.raw_scale(tau);
      } catch (const DomainError&) {
        throw DomainError("scale profile degenerates (a^2 <= 0) inside the tau domain");
      }
    }
  } else {
    // Spline positivity between knots is checked on a fine sweep.
    const int sweeps = 20 * static_cast<int>(flow.spline_.size());
    for (int i = 0; i <= sweeps; ++i) {
      const double tau = domain.lo + (domain.hi - domain.lo) * i / sweeps;
      if (!(flow.spline_(tau) > 0.0)) throw DomainError("tabulated interpolant is not positive");
    }
  }
  return flow;
}

MetricSample metric_sample(const FlowMetric& flow, double tau) { return flow.sample(tau); }

double cot_kappa(int kappa, double rho) {
  switch (kappa) {
    case 1: return std::cos(rho) / std::sin(rho);
    case -1: return 1.0 / std::tanh(rho);
    default: return 1.0 / rho;
  }
}

double sn_kappa(int kappa, double rho) {
  switch (kappa) {
    case 1: return std::sin(rho);
    case -1: return std::sinh(rho);
    default: return rho;
  }
}

double laplace_beltrami_radial(const FlowMetric& flow, double tau, double rho, double u_rho,
                               double u_rhorho) {
  if (!flow.in_chart(rho)) throw DomainError("rho outside the chart");
  const MetricSample g = flow.sample(tau);
  const double inv_a2 = 1.0 / (g.a * g.a);
  const int n = flow.dimension();
  if (flow.model().is_line()) return u_rhorho * inv_a2;
  if (rho == 0.0) {
    if (std::abs(u_rho) > 1e-8 * (1.0 + std::abs(u_rhorho))) {
      throw DomainError("field is not even at the pole (u_rho(0) != 0)");
    }
    return n * u_rhorho * inv_a2;
  }
  return (u_rhorho + (n - 1) * cot_kappa(flow.kappa(), rho) * u_rho) * inv_a2;
}

double laplace_beltrami_radial(const FlowMetric& flow, const std::function<double(double)>& u,
                               double tau, double rho, double h) {
  const bool radial = !flow.model().is_line();
  auto f = [&](double x) { return u(radial ? std::abs(x) : x); };
  const double fp2 = f(rho + 2 * h), fp1 = f(rho + h), f0 = f(rho), fm1 = f(rho - h),
               fm2 = f(rho - 2 * h);
  const double d1 = (-fp2 + 8 * fp1 - 8 * fm1 + fm2) / (12 * h);
  const double d2 = (-fp2 + 16 * fp1 - 30 * f0 + 16 * fm1 - fm2) / (12 * h * h);
  if (radial && rho == 0.0) return laplace_beltrami_radial(flow, tau, rho, 0.0, d2);
  return laplace_beltrami_radial(flow, tau, rho, d1, d2);
}

ClassificationReport classify_flow(const FlowMetric& flow, double K, int tau_samples) {
  if (tau_samples < 2) tau_samples = 2;
  ClassificationReport r;
  r.K = K;
  r.tolerance = flow.sample_tolerance();
  double min_super = std::numeric_limits<double>::infinity();
  double max_abs_super = 0.0;
  double min_k = std::numeric_limits<double>::infinity();
  double max_abs_k = 0.0;
  double min_H = std::numeric_limits<double>::infinity();
  double running_min_h = std::numeric_limits<double>::infinity();
  bool super_ok = true, k_ok = true, super_eq = true, k_eq = true;
  const auto& d = flow.domain();
  for (int i = 0; i < tau_samples; ++i) {
    const double tau = make_axis(d.lo, d.hi, tau_samples).at(i);
    const MetricSample g = flow.sample(tau);
    const double scale = std::max({1.0, std::abs(g.ric_unit), std::abs(g.h_unit)});
    const double tol = r.tolerance * scale;
    const double res = g.ric_unit - g.h_unit;
    const double res_k = res + K;
    min_super = std::min(min_super, res);
    min_k = std::min(min_k, res_k);
    max_abs_super = std::max(max_abs_super, std::abs(res));
    max_abs_k = std::max(max_abs_k, std::abs(res_k));
    super_ok = super_ok && res >= -tol;
    k_ok = k_ok && res_k >= -tol;
    super_eq = super_eq && std::abs(res) <= tol;
    k_eq = k_eq && std::abs(res_k) <= tol;
    min_H = std::min(min_H, g.H);
    running_min_h = std::min(running_min_h, g.h_unit);
    r.admissibility.push_back({tau, std::max(0.0, -running_min_h)});
  }
  r.super_ricci = super_ok;
  r.super_ricci_equality = super_eq;
  r.minus_k_super_ricci = k_ok;
  r.minus_k_equality = k_eq;
  r.min_super_residual = min_super;
  r.min_minus_k_residual = min_k;
  r.min_H = min_H;
  r.h_nonnegative = min_H >= -r.tolerance;
  return r;
}

}  // namespace rflab

#include "rflab/lgeodesic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include <boost/numeric/odeint.hpp>

#include "rflab/cubic_spline.hpp"
#include "rflab/error.hpp"
#include "rflab/parallel.hpp"
#include "rflab/quadrature.hpp"

namespace rflab {

namespace odeint = boost::numeric::odeint;

namespace {

using OdeState = std::array<double, 3>;  // rho, sigma = rho_s, running L

void require_base_time(const FlowMetric& flow) {
  if (flow.domain().lo != 0.0) {
    throw DomainError("L-geodesics start at tau = 0; the flow domain must begin there");
  }
}

void require_target(const FlowMetric& flow, const SpaceTimePoint& target) {
  if (!(target.tau > 0.0)) throw DomainError("target must have tau > 0");
  if (!flow.domain().contains(target.tau)) throw DomainError("target tau outside the flow domain");
  if (!flow.in_chart(target.rho)) throw DomainError("target outside the chart");
  if (!flow.model().is_line() && target.rho < 0.0) {
    throw DomainError("radial charts need rho >= 0");
  }
}

void validate_curve(const FlowMetric& flow, const SampledCurve& c) {
  if (c.tau.size() != c.rho.size()) throw DomainError("curve tau/rho size mismatch");
  if (c.tau.size() < kMinCurveKnots) throw DomainError("curve needs at least 16 knots");
  if (c.order != 1 && c.order != 3) throw DomainError("curve order must be 1 or 3");
  if (!(c.tau.front() > 0.0)) throw DomainError("curve knots must lie in (0, tau_bar]");
  for (std::size_t k = 1; k < c.tau.size(); ++k) {
    if (!(c.tau[k] > c.tau[k - 1])) throw DomainError("curve knots are not strictly increasing");
  }
  for (double r : c.rho) {
    if (!flow.in_chart(r)) throw DomainError("curve exits the chart");
  }
  if (!flow.domain().contains(c.tau.back())) throw DomainError("curve leaves the flow domain");
}

// s knots including the implied base point s = 0.
std::vector<double> s_knots(const SampledCurve& c) {
  std::vector<double> s(c.tau.size() + 1, 0.0);
  for (std::size_t k = 0; k < c.tau.size(); ++k) s[k + 1] = std::sqrt(c.tau[k]);
  return s;
}

std::vector<double> rho_knots(const SampledCurve& c) {
  std::vector<double> r(c.rho.size() + 1, 0.0);
  std::copy(c.rho.begin(), c.rho.end(), r.begin() + 1);
  return r;
}

double a2_at_s(const FlowMetric& flow, double s) {
  const double a = flow.raw_scale(s * s).a;
  return a * a;
}

// J(s_bar) = int_0^s_bar 2 s^2 H(s^2) ds.
double j_integral(const FlowMetric& flow, double s_bar, double tol) {
  if (flow.is_static()) return 0.0;
  const int n = flow.dimension();
  auto f = [&](double s) {
    const ScaleState st = flow.raw_scale(s * s);
    return 2.0 * s * s * n * st.da / st.a;
  };
  return integrate_adaptive(f, 0.0, s_bar, tol, 1e-14).value;
}

struct Rhs {
  const FlowMetric* flow;
  void operator()(const OdeState& x, OdeState& dx, double s) const {
    const ScaleState st = flow->raw_scale(s * s);
    const double h = st.da / st.a;
    dx[0] = x[1];
    dx[1] = -4.0 * s * h * x[1];
    dx[2] = 2.0 * s * s * flow->dimension() * h + 0.5 * st.a * st.a * x[1] * x[1];
  }
};

double shoot_endpoint(const FlowMetric& flow, double v_inf, double s_bar, double tol) {
  OdeState x{0.0, 2.0 * v_inf, 0.0};
  odeint::integrate_adaptive(odeint::make_controlled(tol, tol, odeint::runge_kutta_dopri5<OdeState>()),
                             Rhs{&flow}, x, 0.0, s_bar, s_bar / 64.0);
  return x[0];
}

double first_integral_drift(const std::vector<double>& c) {
  double ref = c.front();
  double drift = 0.0;
  for (double v : c) drift = std::max(drift, std::abs(v - ref));
  // Relative to the initial value; absolute for the trivial curve.
  return ref == 0.0 ? drift : drift / std::abs(ref);
}

}  // namespace

SampledCurve straight_curve(const SpaceTimePoint& target, std::size_t knots) {
  SampledCurve c;
  c.order = 1;
  const double s_bar = std::sqrt(target.tau);
  for (std::size_t k = 1; k <= knots; ++k) {
    const double frac = static_cast<double>(k) / knots;
    const double s = s_bar * frac;
    c.tau.push_back(k == knots ? target.tau : s * s);
    c.rho.push_back(target.rho * frac);
  }
  return c;
}

double l_length(const FlowMetric& flow, const SampledCurve& curve) {
  validate_curve(flow, curve);
  const auto s = s_knots(curve);
  const auto r = rho_knots(curve);
  const std::size_t segments = s.size() - 1;
  const double seg_tol = 1e-10 / static_cast<double>(segments);
  double kinetic = 0.0;
  if (curve.order == 1) {
    for (std::size_t i = 0; i < segments; ++i) {
      const double ds = s[i + 1] - s[i];
      const double slope = (r[i + 1] - r[i]) / ds;
      const double w =
          integrate_adaptive([&](double x) { return a2_at_s(flow, x); }, s[i], s[i + 1], seg_tol)
              .value;
      kinetic += 0.5 * w * slope * slope;
    }
  } else {
    const CubicSpline spline(s, r);
    for (std::size_t i = 0; i < segments; ++i) {
      auto f = [&](double x) {
        const double d = spline.evaluate(x).first;
        return 0.5 * a2_at_s(flow, x) * d * d;
      };
      kinetic += integrate_adaptive(f, s[i], s[i + 1], seg_tol).value;
    }
  }
  return j_integral(flow, s.back(), 5e-10) + kinetic;
}

LGeodesic integrate_l_geodesic(const FlowMetric& flow, double v_inf, double tau_bar,
                               const GeodesicOptions& options) {
  require_base_time(flow);
  if (!(tau_bar > 0.0) || !flow.domain().contains(tau_bar)) {
    throw DomainError("tau_bar must be positive and inside the flow domain");
  }
  if (!flow.model().is_line() && v_inf < 0.0) throw DomainError("radial charts need v_inf >= 0");
  const std::size_t knots = std::max(options.knots, kMinCurveKnots);
  const double s_bar = std::sqrt(tau_bar);

  std::vector<double> times(knots + 1, 0.0);
  for (std::size_t k = 1; k <= knots; ++k) times[k] = s_bar * static_cast<double>(k) / knots;
  times.back() = s_bar;

  std::vector<OdeState> states;
  OdeState x{0.0, 2.0 * v_inf, 0.0};
  try {
    odeint::integrate_times(
        odeint::make_dense_output(options.ode_tol, options.ode_tol,
                                  odeint::runge_kutta_dopri5<OdeState>()),
        Rhs{&flow}, x, times.begin(), times.end(), s_bar / 64.0,
        [&](const OdeState& st, double) { states.push_back(st); });
  } catch (const DomainError&) {
    throw;
  } catch (const std::exception& e) {
    throw NumericalError(std::string("L-geodesic ODE step failure: ") + e.what());
  }
  if (states.size() != times.size()) throw NumericalError("L-geodesic ODE stopped early");

  LGeodesic g;
  g.method = "shooting";
  g.v_inf = v_inf;
  g.curve.order = 3;
  std::vector<double> integrals;
  for (std::size_t k = 1; k < states.size(); ++k) {
    const double s = times[k];
    const OdeState& st = states[k];
    if (!std::isfinite(st[0]) || !std::isfinite(st[2])) throw NumericalError("non-finite ODE state");
    if (!flow.in_chart(st[0])) throw DomainError("L-geodesic exits the chart before tau_bar");
    const double a2 = a2_at_s(flow, s);
    g.curve.tau.push_back(k == knots ? tau_bar : s * s);
    g.curve.rho.push_back(st[0]);
    g.tangent.push_back(st[1] / (2.0 * s));
    integrals.push_back(0.5 * a2 * st[1]);
  }
  const double a0 = flow.raw_scale(0.0).a;
  g.first_integral = a0 * a0 * v_inf;
  integrals.insert(integrals.begin(), g.first_integral);
  g.first_integral_drift = first_integral_drift(integrals);
  g.l_length = states.back()[2];
  return g;
}

RadialIntegrals radial_integrals(const FlowMetric& flow, double tau_bar) {
  require_base_time(flow);
  const double s_bar = std::sqrt(tau_bar);
  RadialIntegrals out;
  out.I = integrate_adaptive([&](double s) { return 2.0 / a2_at_s(flow, s); }, 0.0, s_bar, 1e-15,
                             1e-14)
              .value;
  out.J = j_integral(flow, s_bar, 1e-15);
  return out;
}

LGeodesic solve_minimal_l_geodesic(const FlowMetric& flow, const SpaceTimePoint& target,
                                   const GeodesicOptions& options) {
  require_base_time(flow);
  require_target(flow, target);
  const std::size_t knots = std::max(options.knots, kMinCurveKnots);
  const double s_bar = std::sqrt(target.tau);

  // Cumulative I(s) on the knots; rho(s) = c I(s).
  std::vector<double> s(knots + 1, 0.0), cumulative(knots + 1, 0.0);
  for (std::size_t k = 1; k <= knots; ++k) {
    s[k] = k == knots ? s_bar : s_bar * static_cast<double>(k) / knots;
    cumulative[k] =
        cumulative[k - 1] +
        integrate_adaptive([&](double x) { return 2.0 / a2_at_s(flow, x); }, s[k - 1], s[k], 1e-16,
                           1e-14)
            .value;
  }
  const double I = cumulative.back();
  const double c = target.rho / I;

  LGeodesic g;
  g.method = "first-integral";
  g.first_integral = c;
  g.curve.order = 3;
  const double a0 = flow.raw_scale(0.0).a;
  g.v_inf = c / (a0 * a0);
  for (std::size_t k = 1; k <= knots; ++k) {
    g.curve.tau.push_back(k == knots ? target.tau : s[k] * s[k]);
    g.curve.rho.push_back(k == knots ? target.rho : target.rho * (cumulative[k] / I));
    g.tangent.push_back(c / (s[k] * a2_at_s(flow, s[k])));
  }
  g.first_integral_drift = 0.0;
  g.l_length = j_integral(flow, s_bar, 1e-15) + target.rho * target.rho / I;
  return g;
}

ShootingResult shoot_minimal_l_geodesic(const FlowMetric& flow, const SpaceTimePoint& target,
                                        const ShootingOptions& options) {
  require_base_time(flow);
  require_target(flow, target);
  const double s_bar = std::sqrt(target.tau);
  const double tol = std::min(1e-12, options.geodesic.ode_tol);
  const double guess = target.rho / (2.0 * s_bar);
  const double scale = std::max(1.0, std::abs(target.rho));
  auto residual = [&](double v) { return shoot_endpoint(flow, v, s_bar, tol) - target.rho; };

  auto solve_from = [&](double v0) -> std::optional<double> {
    if (target.rho == 0.0) return 0.0;
    double v_prev = v0;
    double f_prev = residual(v_prev);
    double v = v0 == 0.0 ? 1e-3 : v0 * (1.0 + 1e-3);
    for (int it = 0; it < options.max_iterations; ++it) {
      const double f = residual(v);
      if (std::abs(f) <= options.tolerance * scale) return v;
      const double denom = f - f_prev;
      if (denom == 0.0 || !std::isfinite(denom)) return std::nullopt;
      double step = -f * (v - v_prev) / denom;
      const double limit = 2.0 * std::max(1.0, std::abs(v));
      if (std::abs(step) > limit) step = std::copysign(limit, step);
      v_prev = v;
      f_prev = f;
      v += step;
      if (!flow.model().is_line() && v < 0.0) v = 0.5 * v_prev;
    }
    return std::nullopt;
  };

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> jitter(-0.5, 0.5);
  std::vector<double> roots;
  for (int k = 0; k < std::max(1, options.starts); ++k) {
    const double start = k == 0 ? guess : guess * (1.0 + jitter(rng)) + jitter(rng) * 1e-3;
    if (auto v = solve_from(start)) {
      const bool seen = std::any_of(roots.begin(), roots.end(), [&](double r) {
        return std::abs(r - *v) <= 1e-6 * std::max(1.0, std::abs(r));
      });
      if (!seen) roots.push_back(*v);
    }
  }
  if (roots.empty()) throw NumericalError("shooting did not converge from any start");
  std::sort(roots.begin(), roots.end());

  ShootingResult out;
  out.roots = roots;
  std::size_t best = 0;
  for (std::size_t k = 0; k < roots.size(); ++k) {
    out.lengths.push_back(integrate_l_geodesic(flow, roots[k], target.tau, options.geodesic).l_length);
    if (out.lengths[k] < out.lengths[best]) best = k;
  }
  for (std::size_t i = 0; i < roots.size(); ++i) {
    for (std::size_t j = i + 1; j < roots.size(); ++j) {
      if (std::abs(out.lengths[i] - out.lengths[j]) <= 1e-6) out.smooth = false;
    }
  }
  out.geodesic = integrate_l_geodesic(flow, roots[best], target.tau, options.geodesic);
  // The terminal knot carries the solved boundary value, not the interpolated one.
  if (std::abs(out.geodesic.curve.rho.back() - target.rho) > 1e-8) {
    throw NumericalError("shooting boundary mismatch above 1e-8");
  }
  out.geodesic.curve.rho.back() = target.rho;
  return out;
}

namespace {

// Piecewise-linear-in-s discretisation: L = J + sum W_i d_i^2 / (2 ds_i^2).
struct DiscreteFunctional {
  std::vector<double> s;
  std::vector<double> alpha;  // W_i / ds_i^2
  double J = 0.0;

  DiscreteFunctional(const FlowMetric& flow, const std::vector<double>& knots) : s(knots) {
    alpha.resize(s.size() - 1);
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      const double ds = s[i + 1] - s[i];
      const double w = integrate_adaptive([&](double x) { return a2_at_s(flow, x); }, s[i],
                                          s[i + 1], 1e-15, 1e-14)
                           .value;
      alpha[i] = w / (ds * ds);
    }
    J = j_integral(flow, s.back(), 1e-15);
  }

  double value(const std::vector<double>& r) const {
    double kinetic = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      const double d = r[i + 1] - r[i];
      kinetic += 0.5 * alpha[i] * d * d;
    }
    return J + kinetic;
  }

  // Gradient with respect to the interior knots; endpoints get 0.
  std::vector<double> gradient(const std::vector<double>& r) const {
    std::vector<double> g(r.size(), 0.0);
    for (std::size_t k = 1; k + 1 < r.size(); ++k) {
      g[k] = alpha[k - 1] * (r[k] - r[k - 1]) - alpha[k] * (r[k + 1] - r[k]);
    }
    return g;
  }
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

}  // namespace

double discrete_l_length(const FlowMetric& flow, const SampledCurve& curve) {
  validate_curve(flow, curve);
  return DiscreteFunctional(flow, s_knots(curve)).value(rho_knots(curve));
}

LGeodesic variational_refine(const FlowMetric& flow, const SampledCurve& curve, int iterations) {
  require_base_time(flow);
  validate_curve(flow, curve);
  const DiscreteFunctional F(flow, s_knots(curve));
  std::vector<double> r = rho_knots(curve);

  const double initial = F.value(r);
  double current = initial;
  std::vector<double> g = F.gradient(r);
  std::vector<double> p(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) p[i] = -g[i];
  const double g_scale = std::max(1.0, std::sqrt(dot(g, g)));
  bool descended = false;
  bool converged = std::sqrt(dot(g, g)) <= 1e-13 * g_scale;

  std::vector<double> trial(r.size());
  for (int it = 0; it < iterations && !converged; ++it) {
    // Secant line search on phi'(t) = grad(r + t p) . p.
    auto slope = [&](double t) {
      for (std::size_t i = 0; i < r.size(); ++i) trial[i] = r[i] + t * p[i];
      return dot(F.gradient(trial), p);
    };
    double t0 = 0.0, d0 = dot(g, p);
    if (d0 >= 0.0) {
      for (std::size_t i = 0; i < g.size(); ++i) p[i] = -g[i];
      d0 = dot(g, p);
    }
    double t1 = 1.0, d1 = slope(t1);
    for (int ls = 0; ls < 20 && std::abs(d1) > 1e-12 * std::abs(d0); ++ls) {
      if (d1 == d0) break;
      const double t2 = t1 - d1 * (t1 - t0) / (d1 - d0);
      t0 = t1;
      d0 = d1;
      t1 = t2;
      d1 = slope(t1);
    }
    for (std::size_t i = 0; i < r.size(); ++i) trial[i] = r[i] + t1 * p[i];
    const double next = F.value(trial);
    if (!(next < current)) {
      // No representable decrease left: accept the curve if it is stationary
      // to the precision the functional can resolve.
      converged = std::sqrt(dot(g, g)) <= 1e-8 * std::max(1.0, std::abs(current));
      break;
    }
    descended = true;
    current = next;
    r = trial;
    const std::vector<double> g_new = F.gradient(r);
    const double gg = dot(g, g);
    double beta = gg > 0.0 ? (dot(g_new, g_new) - dot(g_new, g)) / gg : 0.0;
    beta = std::max(0.0, beta);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = -g_new[i] + beta * p[i];
    g = g_new;
    converged = std::sqrt(dot(g, g)) <= 1e-13 * g_scale;
  }
  if (!descended && !converged) {
    throw NumericalError("variational_refine: iteration budget exhausted without descent");
  }

  LGeodesic out;
  out.method = "variational";
  out.curve.order = 1;
  out.curve.tau = curve.tau;
  out.curve.rho.assign(r.begin() + 1, r.end());
  std::vector<double> integrals;
  for (std::size_t k = 1; k < r.size(); ++k) {
    // Tangent and first integral from the incoming segment.
    const double ds = F.s[k] - F.s[k - 1];
    const double sigma = (r[k] - r[k - 1]) / ds;
    out.tangent.push_back(sigma / (2.0 * F.s[k]));
    integrals.push_back(0.5 * F.alpha[k - 1] * ds * sigma);
  }
  out.first_integral = integrals.front();
  out.first_integral_drift = first_integral_drift(integrals);
  const double a0 = flow.raw_scale(0.0).a;
  out.v_inf = out.first_integral / (a0 * a0);
  out.l_length = std::min(current, initial);
  return out;
}

Field2D ReducedField::ell() const {
  Field2D f(rho, tau);
  for (std::size_t k = 0; k < nodes.size(); ++k) f.values[k] = nodes[k].ell;
  return f;
}

Field2D ReducedField::Lbar() const {
  Field2D f(rho, tau);
  for (std::size_t k = 0; k < nodes.size(); ++k) f.values[k] = nodes[k].Lbar;
  return f;
}

Field2D ReducedField::dfrak() const {
  Field2D f(rho, tau);
  for (std::size_t k = 0; k < nodes.size(); ++k) f.values[k] = nodes[k].dfrak;
  return f;
}

ReducedField reduced_field(const FlowMetric& flow, const Axis& rho, const Axis& tau,
                           const ReducedFieldOptions& options) {
  require_base_time(flow);
  if (!(tau.lo > 0.0)) throw DomainError("reduced field needs tau > 0 on every row");
  ReducedField field;
  field.rho = rho;
  field.tau = tau;
  field.nodes.resize(static_cast<std::size_t>(rho.count) * tau.count);

  // I and J depend only on the row.
  std::vector<RadialIntegrals> rows(tau.count);
  parallel_for(
      rows.size(), [&](std::size_t j) { rows[j] = radial_integrals(flow, tau.at(static_cast<int>(j))); },
      options.workers);

  parallel_for(
      field.nodes.size(),
      [&](std::size_t k) {
        const int i = static_cast<int>(k % rho.count);
        const int j = static_cast<int>(k / rho.count);
        ReducedNode& node = field.nodes[k];
        node.rho = rho.at(i);
        node.tau = tau.at(j);
        const SpaceTimePoint target{node.rho, node.tau};
        try {
          require_target(flow, target);
          const RadialIntegrals& ij = rows[j];
          node.first_integral = node.rho / ij.I;
          node.L = ij.J + node.rho * node.rho / ij.I;
          node.ell = node.L / (2.0 * std::sqrt(node.tau));
          node.Lbar = 4.0 * node.tau * node.ell;
          if (node.Lbar >= 0.0) {
            node.dfrak = std::sqrt(node.Lbar);
          } else {
            node.dfrak = std::numeric_limits<double>::quiet_NaN();
            node.status = "negative-Lbar";
          }
          if (options.multistart) {
            ShootingOptions so = options.shooting;
            so.seed = options.shooting.seed ^ (0x9E3779B97F4A7C15ULL * (k + 1));
            const ShootingResult shot = shoot_minimal_l_geodesic(flow, target, so);
            node.smooth = shot.smooth;
            node.shooting_gap =
                std::abs(shot.geodesic.l_length - node.L) / std::max(1.0, std::abs(node.L));
          }
        } catch (const std::exception& e) {
          node.status = e.what();
          node.smooth = false;
          node.L = node.ell = node.Lbar = node.dfrak = std::numeric_limits<double>::quiet_NaN();
        }
      },
      options.workers);
  return field;
}

}  // namespace rflab

#include "rflab/k_scaling.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <sstream>

#include "rflab/cubic_spline.hpp"
#include "rflab/error.hpp"
#include "rflab/flow_quantities.hpp"
#include "rflab/grid.hpp"

namespace rflab {

namespace {

double expm1_ratio(double x) { return std::abs(x) < 1e-300 ? 1.0 : std::expm1(x) / x; }

// Fourth-order central difference.
template <class F>
double d1_central4(F&& f, double x, double h) {
  return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h);
}

}  // namespace

double sigma_eval(double K, double s) {
  if (K == 0.0) return s;
  const double q = -2.0 * K * s;
  if (!(q > -1.0)) {
    std::ostringstream msg;
    msg << "sigma_eval: s = " << s << " outside J for K = " << K;
    throw DomainError(msg.str());
  }
  return -std::log1p(q) / (2.0 * K);
}

double sigma_inv(double K, double t) {
  if (K == 0.0) return t;
  return -std::expm1(-2.0 * K * t) / (2.0 * K);
}

double sigma_derivative(double K, double s) {
  if (K == 0.0) return 1.0;
  const double q = 1.0 - 2.0 * K * s;
  if (!(q > 0.0)) throw DomainError("sigma_derivative: s outside J");
  return 1.0 / q;
}

SigmaCheck sigma_pair_check(double K, std::size_t samples, std::uint64_t seed) {
  SigmaCheck out;
  out.K = K;
  out.samples = samples;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> tdist(-2.0, 2.0);
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = tdist(rng);
    const double s = sigma_inv(K, t);
    out.max_inverse_error = std::max(out.max_inverse_error, std::abs(sigma_eval(K, s) - t));

    const double ds = sigma_derivative(K, s);
    const double expo = std::exp(2.0 * K * sigma_eval(K, s));
    out.max_derivative_error = std::max(out.max_derivative_error, std::abs(ds - expo) / ds);

    // Complex-step difference: no subtractive cancellation, so it resolves
    // sigma' to rounding even next to the edge of J.
    const double step = 1e-30;
    const std::complex<double> z(s, step);
    const std::complex<double> sz = K == 0.0 ? z : -std::log(1.0 - 2.0 * K * z) / (2.0 * K);
    const double cs = sz.imag() / step;
    out.max_fd_derivative_error = std::max(out.max_fd_derivative_error, std::abs(cs - expo) / expo);
  }
  return out;
}

ScaleState ForwardFlow::scale(double t) const { return profile_(t); }

double ForwardFlow::ric_unit(double t) const {
  const double a = scale(t).a;
  return (n_ - 1) * kappa_ / (a * a);
}

double ForwardFlow::scalar(double t) const { return n_ * ric_unit(t); }

double ForwardFlow::d_scalar(double t) const {
  const ScaleState st = scale(t);
  return -2.0 * scalar(t) * st.da / st.a;
}

double ForwardFlow::k_ricci_residual(double K, double t) const {
  const ScaleState st = scale(t);
  return st.a * st.da + (n_ - 1) * kappa_ - K * st.a * st.a;
}

ForwardFlow make_forward_k_ricci(int n, Curvature curvature, double K, double a0, double t_lo,
                                 double t_hi) {
  if (n < 2) throw DomainError("make_forward_k_ricci: n >= 2 required");
  if (!(a0 > 0.0)) throw DomainError("make_forward_k_ricci: a0 must be positive");
  if (!(t_lo < t_hi)) throw DomainError("make_forward_k_ricci: empty t window");
  const double alpha = -(n - 1.0) * sign(curvature);
  const double beta = K;
  const double y0 = a0 * a0;
  auto profile = [alpha, beta, y0](double t) {
    const double y = y0 * std::exp(2.0 * beta * t) + 2.0 * alpha * t * expm1_ratio(2.0 * beta * t);
    if (!(y > 0.0)) throw DomainError("forward K-Ricci flow: a^2 <= 0 (past extinction)");
    const double a = std::sqrt(y);
    const double da = (alpha + beta * y) / a;
    const double dda = (2.0 * beta * a * da - da * da) / a;
    return ScaleState{a, da, dda};
  };
  profile(t_lo);
  profile(t_hi);
  ForwardFlow f;
  f.n_ = n;
  f.kappa_ = sign(curvature);
  f.t_lo_ = t_lo;
  f.t_hi_ = t_hi;
  f.profile_ = profile;
  return f;
}

ForwardFlow make_forward_tabulated(int n, Curvature curvature, std::vector<double> t,
                                   std::vector<double> a) {
  if (n < 2) throw DomainError("make_forward_tabulated: n >= 2 required");
  if (t.size() != a.size() || t.size() < 5) {
    throw DomainError("make_forward_tabulated: need >= 5 matching samples");
  }
  if (std::any_of(a.begin(), a.end(), [](double v) { return !(v > 0.0); })) {
    throw DomainError("make_forward_tabulated: a must be positive");
  }
  auto spline = std::make_shared<CubicSpline>(t, a);
  ForwardFlow f;
  f.n_ = n;
  f.kappa_ = sign(curvature);
  f.t_lo_ = t.front();
  f.t_hi_ = t.back();
  f.profile_ = [spline](double x) {
    if (x < spline->front() || x > spline->back()) {
      throw DomainError("forward tabulated flow: t outside the table");
    }
    const SplineValue v = spline->evaluate(x);
    return ScaleState{v.value, v.first, v.second};
  };
  return f;
}

double k_ricci_extinction_time(int n, Curvature curvature, double K, double a0) {
  const double c = (n - 1.0) * sign(curvature);
  const double y0 = a0 * a0;
  if (c <= 0.0) return std::numeric_limits<double>::infinity();
  if (K == 0.0) return y0 / (2.0 * c);
  // y(t) = (y0 - c/K) e^{2Kt} + c/K.
  const double balance = c / K;
  if (K > 0.0 && y0 >= balance) return std::numeric_limits<double>::infinity();
  return std::log(balance / (balance - y0)) / (2.0 * K);
}

TransformedFlow::TransformedFlow(ForwardFlow source, double K)
    : source_(std::move(source)),
      K_(K),
      s_lo_(sigma_inv(K, source_.t_lo())),
      s_hi_(sigma_inv(K, source_.t_hi())) {}

ScaleState TransformedFlow::scale(double s) const {
  const double t = sigma_eval(K_, s);
  const ScaleState st = source_.scale(t);
  const double e = std::exp(K_ * t);
  return {st.a / e, e * (st.da - K_ * st.a), e * e * e * (st.dda - K_ * K_ * st.a)};
}

double TransformedFlow::source_scale(double t) const {
  return std::exp(K_ * t) * scale(sigma_inv(K_, t)).a;
}

TransformedFlow transform_to_ricci_flow(const ForwardFlow& source, double K) {
  constexpr int kProbe = 201;
  const int n = source.dimension();
  for (int k = 0; k < kProbe; ++k) {
    const double t = make_axis(source.t_lo(), source.t_hi(), kProbe).at(k);
    const ScaleState st = source.scale(t);
    const double r = source.k_ricci_residual(K, t);
    const double ref = std::max({1.0, std::abs(K) * st.a * st.a, double(n - 1)});
    if (std::abs(r) > 1e-8 * ref) {
      std::ostringstream msg;
      msg << "transform_to_ricci_flow: source fails the K-Ricci test at t = " << t
          << " (residual " << r << ")";
      throw DomainError(msg.str());
    }
  }
  return TransformedFlow(source, K);
}

TransformReport check_transform(const TransformedFlow& flow, int samples) {
  TransformReport rep;
  rep.K = flow.K();
  const ForwardFlow& src = flow.source();
  const double c = (src.dimension() - 1.0) * src.kappa();

  for (int k = 0; k < samples; ++k) {
    const double t = make_axis(src.t_lo(), src.t_hi(), samples).at(k);
    rep.source_residual = std::max(rep.source_residual, std::abs(src.k_ricci_residual(flow.K(), t)));
    const double a = src.scale(t).a;
    rep.round_trip_error = std::max(rep.round_trip_error, std::abs(flow.source_scale(t) - a) / a);
  }

  const double width = flow.s_hi() - flow.s_lo();
  const double h = 1e-3 * width;
  auto y = [&flow](double s) {
    const double a = flow.scale(s).a;
    return a * a;
  };
  for (int k = 0; k < samples; ++k) {
    const double s = flow.s_lo() + 2 * h + (width - 4 * h) * k / (samples - 1);
    const ScaleState st = flow.scale(s);
    rep.ricci_residual_exact =
        std::max(rep.ricci_residual_exact, std::abs(2.0 * st.a * st.da + 2.0 * c));
    rep.ricci_residual_fd =
        std::max(rep.ricci_residual_fd, std::abs(d1_central4(y, s, h) + 2.0 * c));
  }
  rep.samples = static_cast<std::size_t>(samples);
  rep.initial_mismatch = std::abs(std::exp(flow.K() * src.t_lo()) * flow.scale(flow.s_lo()).a -
                                  src.scale(src.t_lo()).a);
  rep.pass = rep.ricci_residual_fd <= 1e-6 && rep.round_trip_error <= 1e-8 &&
             rep.initial_mismatch <= 1e-12;
  return rep;
}

namespace {

HarnackReport harnack_scan(const ForwardFlow& flow, double K, const std::vector<double>& t_grid,
                           const std::vector<double>& vmags, bool ancient) {
  HarnackReport rep;
  rep.K = K;
  rep.variant = ancient ? "ancient" : "finite-time";
  if (flow.kappa() < 0) {
    rep.status = "skipped";
    return rep;
  }
  rep.min_lhs = std::numeric_limits<double>::infinity();
  for (double t : t_grid) {
    if (!ancient && !(t > 0.0)) throw DomainError("k_trace_harnack_check: t grid must be > 0");
    if (ancient && t > 0.0) throw DomainError("k_ancient_harnack_check: t grid must be <= 0");
    const double S = flow.scalar(t);
    double coef = 0.0;
    if (ancient) {
      coef = K > 0.0 ? 2.0 * K : 0.0;
    } else {
      coef = K == 0.0 ? 1.0 / t : -2.0 * K / std::expm1(-2.0 * K * t);
    }
    const double base = flow.d_scalar(t) + coef * S;
    const double ric = flow.ric_unit(t);
    for (double v : vmags) {
      const double lhs = base + 2.0 * ric * v * v;
      ++rep.samples;
      rep.rows.push_back({t, v, lhs});
      if (lhs < rep.min_lhs) {
        rep.min_lhs = lhs;
        rep.worst_t = t;
        rep.worst_v = v;
      }
    }
  }
  rep.status = rep.min_lhs >= -1e-9 ? "pass" : "fail";
  return rep;
}

}  // namespace

HarnackReport k_trace_harnack_check(const ForwardFlow& flow, double K,
                                    const std::vector<double>& t_grid,
                                    const std::vector<double>& vmags) {
  return harnack_scan(flow, K, t_grid, vmags, false);
}

HarnackReport k_ancient_harnack_check(const ForwardFlow& flow, double K,
                                      const std::vector<double>& t_grid,
                                      const std::vector<double>& vmags) {
  return harnack_scan(flow, K, t_grid, vmags, true);
}

KfrdvReport kfrdv_check(const FlowMetric& flow, const std::vector<double>& vmags,
                        int tau_samples) {
  const auto K_opt = flow.k_ricci_constant();
  if (!K_opt) throw DomainError("kfrdv_check: flow must be BackwardRicci or BackwardKRicci");
  KfrdvReport rep;
  rep.K = *K_opt;
  const double K = rep.K;
  const int n = flow.dimension();
  const auto dom = flow.domain();
  auto S = [&flow](double tau) { return flow.raw_sample(tau).scalar; };
  tau_samples = std::max(tau_samples, 2);

  for (int k = 0; k < tau_samples; ++k) {
    const double tau = make_axis(dom.lo, dom.hi, tau_samples).at(k);
    const MetricSample m = flow.sample(tau);
    // The closed form is defined slightly below lo, so the stencil may cross it.
    // The step follows the time scale a/|a'| of the profile, and one
    // Richardson pass lifts the stencil to sixth order.
    const double rate = std::abs(m.h_unit);
    const double h = 2e-3 * (rate > 0.0 ? std::min(std::max(1.0, std::abs(tau)), 1.0 / rate)
                                        : std::max(1.0, std::abs(tau)));
    const double dS = (16.0 * d1_central4(S, tau, h) - d1_central4(S, tau, 2.0 * h)) / 15.0;
    const double ric_norm2 = n * m.ric_unit * m.ric_unit;
    rep.evolution_residual =
        std::max(rep.evolution_residual, std::abs(dS + 2.0 * ric_norm2 + 2.0 * K * m.scalar));
    rep.trace_residual = std::max(rep.trace_residual, std::abs(m.H - m.scalar - n * K));
    for (double v : vmags) {
      const QuantitySample q = muller_d(flow, {0.0, tau}, v);
      rep.d_identity_residual =
          std::max(rep.d_identity_residual, std::abs(q.D + 2.0 * K * (m.H + v * v)));
      ++rep.samples;
    }
  }
  rep.pass = rep.evolution_residual <= rep.tolerance && rep.d_identity_residual <= rep.tolerance &&
             rep.trace_residual <= rep.tolerance;
  return rep;
}

}  // namespace rflab

#include "rflab/sz_harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rflab/error.hpp"
#include "rflab/flow_quantities.hpp"
#include "rflab/parallel.hpp"

namespace rflab {

Rational exact_rational(double x) {
  if (!std::isfinite(x)) throw DomainError("exact_rational: non-finite value");
  if (x == 0.0) return Rational(0);
  int exponent = 0;
  const double mantissa = std::frexp(x, &exponent);  // x = mantissa * 2^exponent
  const auto digits = static_cast<long long>(std::ldexp(mantissa, 53));
  exponent -= 53;
  Rational r(digits);
  const boost::multiprecision::cpp_int two_pow = boost::multiprecision::pow(
      boost::multiprecision::cpp_int(2), static_cast<unsigned>(std::abs(exponent)));
  if (exponent >= 0) {
    r *= two_pow;
  } else {
    r /= two_pow;
  }
  return r;
}

namespace {

struct StepParts {
  double S;         // step value
  double one_m_S;   // 1 - S, computed without cancellation
  double log_S;
  double g1;        // g'
  double g2;        // g''
};

// g(x) = -1/x + 1/(1-x) and S = 1 / (1 + e^g).
StepParts step_parts(double x) {
  const double g = -1.0 / x + 1.0 / (1.0 - x);
  StepParts p{};
  if (g > 0.0) {
    const double e = std::exp(-g);
    p.S = e / (1.0 + e);
    p.one_m_S = 1.0 / (1.0 + e);
    p.log_S = -g - std::log1p(e);
  } else {
    const double e = std::exp(g);
    p.S = 1.0 / (1.0 + e);
    p.one_m_S = e / (1.0 + e);
    p.log_S = -std::log1p(e);
  }
  p.g1 = 1.0 / (x * x) + 1.0 / ((1.0 - x) * (1.0 - x));
  p.g2 = -2.0 / (x * x * x) + 2.0 / std::pow(1.0 - x, 3);
  return p;
}

template <class F>
double golden_max(F&& f, double lo, double hi) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return std::max(fc, fd);
}

// Supremum over (0, 1) by a dense scan followed by golden-section refinement.
template <class F>
double sup_on_unit(F&& f) {
  constexpr int kScan = 100000;
  double best = 0.0;
  int best_k = 0;
  for (int k = 1; k < kScan; ++k) {
    const double v = f(static_cast<double>(k) / kScan);
    if (v > best) {
      best = v;
      best_k = k;
    }
  }
  const double lo = static_cast<double>(std::max(best_k - 1, 1)) / kScan;
  const double hi = static_cast<double>(std::min(best_k + 1, kScan - 1)) / kScan;
  return std::max(best, golden_max(f, lo, hi));
}

// Guard factor so the stored constants dominate every sampled quotient.
constexpr double kSupSafety = 1.0 + 1e-12;

}  // namespace

StepValue smooth_step(double x) {
  if (x <= 0.0) return {1.0, 0.0, 0.0};
  if (x >= 1.0) return {0.0, 0.0, 0.0};
  const StepParts p = step_parts(x);
  const double s1ms = p.S * p.one_m_S;
  const double d1 = -s1ms * p.g1;
  const double d2 = s1ms * ((p.one_m_S - p.S) * p.g1 * p.g1 - p.g2);
  return {p.S, d1, d2};
}

double step_d1_quotient(double x, double power) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  const StepParts p = step_parts(x);
  return std::exp((1.0 - power) * p.log_S) * p.one_m_S * p.g1;
}

double step_d2_quotient(double x, double power) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  const StepParts p = step_parts(x);
  return std::exp((1.0 - power) * p.log_S) * p.one_m_S *
         std::abs((p.one_m_S - p.S) * p.g1 * p.g1 - p.g2);
}

Cutoff::Cutoff(double R, double T) : R_(R), T_(T) {
  if (!(R > 0.0) || !(T > 0.0)) throw DomainError("cutoff needs R, T > 0");
  const double s1_alpha = sup_on_unit([](double x) { return step_d1_quotient(x, alpha); });
  const double s2_alpha = sup_on_unit([](double x) { return step_d2_quotient(x, alpha); });
  const double s1_half = sup_on_unit([](double x) { return step_d1_quotient(x, 0.5); });
  sup_s1_ = sup_on_unit([](double x) { return step_d1_quotient(x, 0.0); });
  c_alpha_ = kSupSafety * std::max(2.0 * s1_alpha, 4.0 * s2_alpha);
  c_ = kSupSafety * 4.0 * s1_half;
}

double Cutoff::psi(double r, double tau) const {
  return smooth_step((r - 0.5 * R_) / (0.5 * R_)).value *
         smooth_step((tau - 0.25 * T_) / (0.25 * T_)).value;
}

double Cutoff::d_r(double r, double tau) const {
  return smooth_step((r - 0.5 * R_) / (0.5 * R_)).d1 * (2.0 / R_) *
         smooth_step((tau - 0.25 * T_) / (0.25 * T_)).value;
}

double Cutoff::d_rr(double r, double tau) const {
  return smooth_step((r - 0.5 * R_) / (0.5 * R_)).d2 * (4.0 / (R_ * R_)) *
         smooth_step((tau - 0.25 * T_) / (0.25 * T_)).value;
}

double Cutoff::d_tau(double r, double tau) const {
  return smooth_step((r - 0.5 * R_) / (0.5 * R_)).value *
         smooth_step((tau - 0.25 * T_) / (0.25 * T_)).d1 * (4.0 / T_);
}

void Cutoff::certify(int grid) {
  if (grid < 2) throw DomainError("certification grid needs at least two points per axis");
  CutoffCertification c;
  c.grid = grid;
  struct Rcol {
    double r, x, eta, deta, q1, q2;
  };
  struct Trow {
    double tau, x, chi, chi_1ma, q3;
  };
  std::vector<Rcol> cols(grid);
  std::vector<Trow> rows(grid);
  for (int i = 0; i < grid; ++i) {
    const double r = i == grid - 1 ? R_ : R_ * i / (grid - 1);
    const double x = (r - 0.5 * R_) / (0.5 * R_);
    const StepValue s = smooth_step(x);
    cols[i] = {r, x, s.value, s.d1 * 2.0 / R_, step_d1_quotient(x, alpha) * 2.0 / R_,
               step_d2_quotient(x, alpha) * 4.0 / (R_ * R_)};
  }
  for (int j = 0; j < grid; ++j) {
    const double tau = j == grid - 1 ? 0.5 * T_ : 0.5 * T_ * j / (grid - 1);
    const double x = (tau - 0.25 * T_) / (0.25 * T_);
    const StepValue s = smooth_step(x);
    rows[j] = {tau, x, s.value, std::pow(s.value, 1.0 - alpha), step_d1_quotient(x, 0.5) * 4.0 / T_};
  }
  bool plateau = true, support = true, monotone = true;
  for (const Trow& t : rows) {
    for (const Rcol& rc : cols) {
      const double psi = rc.eta * t.chi;
      if (rc.r <= 0.5 * R_ && t.tau <= 0.25 * T_ && psi != 1.0) plateau = false;
      if ((rc.r >= R_ || t.tau >= 0.5 * T_) && psi != 0.0) support = false;
      const double dr = rc.deta * t.chi;
      if (dr > 0.0 || (rc.r <= 0.5 * R_ && dr != 0.0)) monotone = false;
      if (!(psi > 1e-300)) continue;
      ++c.points_checked;
      c.max_dr_quotient = std::max(c.max_dr_quotient, R_ * rc.q1 * t.chi_1ma);
      c.max_drr_quotient = std::max(c.max_drr_quotient, R_ * R_ * rc.q2 * t.chi_1ma);
      c.max_dtau_quotient = std::max(c.max_dtau_quotient, T_ * std::sqrt(rc.eta) * t.q3);
    }
  }
  c.plateau_ok = plateau;
  c.support_ok = support;
  c.monotone_ok = monotone;
  c.pass = plateau && support && monotone && c.max_dr_quotient <= c_alpha_ &&
           c.max_drr_quotient <= c_alpha_ && c.max_dtau_quotient <= c_;
  cert_ = c;
}

Cutoff build_cutoff(double R, double T, int grid) {
  Cutoff cutoff(R, T);
  cutoff.certify(grid);
  if (!cutoff.certification().pass) {
    throw NumericalError("cutoff certification failed: quotient bound or support property violated");
  }
  return cutoff;
}

EstimateConstants estimate_constants(int n, double C_alpha, double C) {
  if (n < 1) throw DomainError("dimension must be >= 1");
  if (!(C_alpha > 0.0) || !(C > 0.0)) throw DomainError("cutoff constants must be positive");
  EstimateConstants e;
  e.n = n;
  e.C_alpha = C_alpha;
  e.C = C;
  const Rational ca = exact_rational(C_alpha);
  const Rational cc = exact_rational(C);
  const Rational ca2 = ca * ca;
  const Rational nn(n);
  e.Cbar_exact = 24 * ca2 * (nn * nn + Rational(9, 4) + Rational(657, 64) * ca2);
  e.Ctilde1_exact = 6 * cc * cc;
  e.Ctilde2_exact = 24 * (1 + ca2 / 4);
  e.c_exact = std::max({e.Cbar_exact, e.Ctilde1_exact, e.Ctilde2_exact});
  e.Cbar = e.Cbar_exact.convert_to<double>();
  e.Ctilde1 = e.Ctilde1_exact.convert_to<double>();
  e.Ctilde2 = e.Ctilde2_exact.convert_to<double>();
  e.c = e.c_exact.convert_to<double>();
  e.C_n = std::pow(e.c, 0.25);
  return e;
}

EstimateConstants estimate_constants(int n, const Cutoff& cutoff) {
  return estimate_constants(n, cutoff.C_alpha(), cutoff.C());
}

namespace {

bool same_axes(const Field2D& u, const ReducedField& f) {
  return u.rho.count == f.rho.count && u.tau.count == f.tau.count && u.rho.lo == f.rho.lo &&
         u.rho.hi == f.rho.hi && u.tau.lo == f.tau.lo && u.tau.hi == f.tau.hi;
}

double grad_norm_at(const FlowMetric& flow, const Field2D& u, int i, int j) {
  const bool pole_even = !flow.model().is_line() && u.rho.lo == 0.0;
  const double a = flow.sample(u.tau.at(j)).a;
  return std::abs(diff1(rho_line(u, j, pole_even), i).value) / a;
}

}  // namespace

EstimateReport gradient_estimate_check(const FlowMetric& flow, const HeatSolution& sol,
                                       const ReducedField& field, double R, double T, double K,
                                       double A, const EstimateConstants& constants,
                                       const EstimateOptions& options) {
  if (!(R > 0.0) || !(T > 0.0) || !(A > 0.0) || !(K >= 0.0)) {
    throw DomainError("gradient estimate needs R, T, A > 0 and K >= 0");
  }
  if (!same_axes(sol.u, field)) throw DomainError("solution and reduced field must share a grid");

  EstimateReport rep;
  rep.R = R;
  rep.T = T;
  rep.K = K;
  rep.A = A;
  rep.C_n = constants.C_n;
  rep.scale_factor = 1.0 / R + 1.0 / std::sqrt(T) + std::sqrt(K);

  if (!sol.positive) rep.reasons.push_back("solution is not positive on the grid");
  const HypothesisScan scan = scan_hypotheses(flow, K);
  if (!scan.minus_k_super) rep.reasons.push_back("flow is not a (-K)-super Ricci flow");
  if (!scan.d_bound) rep.reasons.push_back("D(V) >= -2K(H + |V|^2) fails");
  if (!scan.trace_harnack) rep.reasons.push_back("H(V) >= -H/tau fails");
  if (!scan.h_nonnegative) rep.reasons.push_back("H >= 0 fails");

  const int nr = field.rho.count, nt = field.tau.count;
  double sup_u = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < nt; ++j) {
    for (int i = 0; i < nr; ++i) {
      const ReducedNode& node = field.at(i, j);
      if (node.status != "ok" || node.tau > T || !(node.dfrak <= R)) continue;
      sup_u = std::max(sup_u, sol.u(i, j));
      if (i == nr - 1 || j == nt - 1) rep.region_truncated = true;
    }
  }
  rep.sup_u_on_QRT = sup_u;
  if (sup_u > A * (1.0 + 1e-12)) rep.reasons.push_back("u exceeds A on Q_{R,T}");
  if (!rep.reasons.empty()) {
    rep.status = "inapplicable";
    return rep;
  }

  std::vector<EstimateNode> nodes(static_cast<std::size_t>(nr) * nt);
  std::vector<char> in_region(nodes.size(), 0), excluded(nodes.size(), 0);
  parallel_for(
      nodes.size(),
      [&](std::size_t k) {
        const int i = static_cast<int>(k % nr);
        const int j = static_cast<int>(k / nr);
        const ReducedNode& node = field.at(i, j);
        if (node.tau > 0.25 * T || !(node.dfrak <= 0.5 * R)) return;
        if (node.status != "ok" || !node.smooth) {
          excluded[k] = 1;
          return;
        }
        in_region[k] = 1;
        const double u = sol.u(i, j);
        EstimateNode& e = nodes[k];
        e.i = i;
        e.j = j;
        e.rho = node.rho;
        e.tau = node.tau;
        e.lhs = grad_norm_at(flow, sol.u, i, j) / u;
        e.rhs = constants.C_n * rep.scale_factor * (1.0 + std::log(A / u));
        e.ratio = e.lhs / e.rhs;
      },
      options.workers);

  bool any = false;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (excluded[k]) ++rep.nodes_excluded;
    if (!in_region[k]) continue;
    ++rep.nodes_in_region;
    if (options.keep_nodes) rep.nodes.push_back(nodes[k]);
    if (!any || nodes[k].ratio > rep.worst.ratio) rep.worst = nodes[k];
    any = true;
  }
  if (!any) {
    rep.status = "inapplicable";
    rep.reasons.push_back("no grid nodes inside Q_{R/2,T/4}");
    return rep;
  }
  rep.margin = 1.0 - rep.worst.ratio;
  rep.status = rep.worst.ratio <= 1.0 + options.ratio_tolerance ? "pass" : "fail";
  return rep;
}

LiouvilleReport liouville_sweep(const FlowMetric& flow, const HeatSolution& sol,
                                const ReducedField& field, const std::vector<double>& R_list,
                                const SpaceTimePoint& probe, const EstimateConstants& constants) {
  if (R_list.size() < 2) throw DomainError("Liouville sweep needs at least two radii");
  if (!same_axes(sol.u, field)) throw DomainError("solution and reduced field must share a grid");
  LiouvilleReport rep;
  rep.mode = sol.positive ? "positive" : "signed";
  rep.probe = probe;
  rep.C_n = constants.C_n;

  const LGeodesic g = solve_minimal_l_geodesic(flow, probe);
  rep.probe_dfrak = std::sqrt(std::max(0.0, 2.0 * std::sqrt(probe.tau) * g.l_length));

  const int nr = field.rho.count, nt = field.tau.count;
  for (double R : R_list) {
    if (!(R > 0.0)) throw DomainError("radii must be positive");
    LiouvilleRow row;
    row.R = R;
    row.probe_inside = rep.probe_dfrak <= 0.5 * R && probe.tau <= 0.25 * R * R;
    if (!row.probe_inside) {
      throw DomainError("probe lies outside Q_{R/2,R^2/4} for R = " + std::to_string(R));
    }
    double sup = 0.0;
    bool any = false;
    for (int j = 0; j < nt; ++j) {
      for (int i = 0; i < nr; ++i) {
        const ReducedNode& node = field.at(i, j);
        if (node.status != "ok" || node.tau > R * R || !(node.dfrak <= R)) continue;
        const double u = sol.u(i, j);
        const double v = rep.mode == "positive" ? u : std::abs(u);
        sup = any ? std::max(sup, v) : v;
        any = true;
        ++row.nodes;
      }
    }
    if (!any) throw DomainError("Q_{R,R^2} contains no grid node for R = " + std::to_string(R));
    row.A_R = sup;
    row.bound = rep.mode == "positive"
                    ? 2.0 * constants.C_n / R * (1.0 + std::log(row.A_R + 1.0))
                    : 6.0 * (1.0 + std::log(3.0)) * constants.C_n * row.A_R / R;
    rep.rows.push_back(row);
  }

  rep.strictly_decreasing = true;
  for (std::size_t k = 1; k < rep.rows.size(); ++k) {
    if (!(rep.rows[k].bound < rep.rows[k - 1].bound)) rep.strictly_decreasing = false;
  }
  // Least-squares slope of log(bound) against log(R).
  double mx = 0.0, my = 0.0;
  for (const auto& r : rep.rows) {
    mx += std::log(r.R);
    my += std::log(r.bound);
  }
  mx /= rep.rows.size();
  my /= rep.rows.size();
  double sxy = 0.0, sxx = 0.0;
  for (const auto& r : rep.rows) {
    sxy += (std::log(r.R) - mx) * (std::log(r.bound) - my);
    sxx += (std::log(r.R) - mx) * (std::log(r.R) - mx);
  }
  rep.loglog_slope = sxx > 0.0 ? sxy / sxx : 0.0;
  rep.classification = rep.strictly_decreasing && rep.loglog_slope <= -0.5
                           ? "consistent-with-constant"
                           : "growth-condition-violated";

  // |grad u| at the grid node nearest to the probe.
  int bi = 0, bj = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j < nt; ++j) {
    for (int i = 0; i < nr; ++i) {
      const double d = std::hypot(field.rho.at(i) - probe.rho, field.tau.at(j) - probe.tau);
      if (d < best) {
        best = d;
        bi = i;
        bj = j;
      }
    }
  }
  rep.probe_grad_u = grad_norm_at(flow, sol.u, bi, bj);
  return rep;
}

}  // namespace rflab

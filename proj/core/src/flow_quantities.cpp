#include "rflab/flow_quantities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "rflab/error.hpp"
#include "rflab/grid.hpp"
#include "rflab/parallel.hpp"
#include "rflab/quadrature.hpp"

namespace rflab {

std::string to_string(MullerConvention c) {
  return c == MullerConvention::Definition ? "definition" : "remark";
}

MullerConvention muller_convention_from_string(const std::string& s) {
  if (s == "definition") return MullerConvention::Definition;
  if (s == "remark") return MullerConvention::Remark;
  throw ConfigError("muller_convention must be 'definition' or 'remark', got '" + s + "'");
}

QuantitySample muller_d(const FlowMetric& flow, const SpaceTimePoint& p, double vmag,
                        MullerConvention convention) {
  const MetricSample g = flow.sample(p.tau);
  const double v2 = vmag * vmag;
  QuantitySample q;
  q.minus_dtau_H = -g.dH;
  q.minus_laplace_H = 0.0;
  q.minus_two_h_norm2 = -2.0 * g.h_norm2;
  q.four_div_h = 0.0;
  q.minus_two_grad_H_V = 0.0;
  q.two_ric_VV = 2.0 * g.ric_unit * v2;
  q.minus_two_h_VV = -2.0 * g.h_unit * v2;
  q.D0 = q.minus_dtau_H + q.minus_laplace_H + q.minus_two_h_norm2 + q.four_div_h +
         q.minus_two_grad_H_V;
  q.R = (g.ric_unit - g.h_unit) * v2;
  q.D = q.D0 + (convention == MullerConvention::Definition ? 2.0 : 1.0) * q.R;
  q.trace_harnack = p.tau > 0.0 ? -g.dH - g.H / p.tau + 2.0 * g.h_unit * v2
                                : std::numeric_limits<double>::quiet_NaN();
  return q;
}

double trace_harnack_h(const FlowMetric& flow, const SpaceTimePoint& p, double vmag) {
  if (!(p.tau > 0.0)) throw DomainError("trace Harnack quantity needs tau > 0");
  return muller_d(flow, p, vmag).trace_harnack;
}

PathIntegrals path_integrals(const FlowMetric& flow, double c, double tau_bar,
                             MullerConvention convention, double abs_tol) {
  if (!(tau_bar > 0.0)) throw DomainError("path integrals need tau_bar > 0");
  if (flow.domain().lo != 0.0 || !flow.domain().contains(tau_bar)) {
    throw DomainError("path integrals need the flow on [0, tau_bar]");
  }
  const double r_weight = convention == MullerConvention::Definition ? 2.0 : 1.0;
  const double c2 = c * c;
  auto kh = [&](double s) {
    const MetricSample g = flow.raw_sample(s * s);
    const double s2 = s * s;
    return -2.0 * s2 * s2 * g.dH - 2.0 * s2 * g.H + 4.0 * s2 * g.h_unit * c2 / (g.a * g.a);
  };
  auto kd = [&](double s) {
    const MetricSample g = flow.raw_sample(s * s);
    const double s2 = s * s;
    return 2.0 * s2 * s2 * (-g.dH - 2.0 * g.h_norm2) +
           2.0 * r_weight * s2 * (g.ric_unit - g.h_unit) * c2 / (g.a * g.a);
  };
  const double s_bar = std::sqrt(tau_bar);
  const QuadratureResult h = integrate_adaptive(kh, 0.0, s_bar, 0.5 * abs_tol);
  const QuadratureResult d = integrate_adaptive(kd, 0.0, s_bar, 0.5 * abs_tol);
  return {h.value, d.value, h.error + d.error};
}

PathIntegrals path_integrals(const FlowMetric& flow, const LGeodesic& geodesic,
                             MullerConvention convention) {
  if (geodesic.curve.tau.empty()) throw DomainError("empty geodesic");
  if (!(geodesic.first_integral_drift <= 1e-6)) {
    throw DomainError("uncertified geodesic: first-integral drift above 1e-6");
  }
  return path_integrals(flow, geodesic.first_integral, geodesic.tau_bar(), convention);
}

HypothesisScan scan_hypotheses(const FlowMetric& flow, double K, int tau_samples,
                               std::vector<double> vmags) {
  HypothesisScan scan;
  scan.K = K;
  scan.min_R_slack = scan.min_D_slack = scan.min_harnack_slack = scan.min_H =
      std::numeric_limits<double>::infinity();
  bool r_ok = true, d_ok = true, th_ok = true, h_ok = true;
  const double base_tol = flow.sample_tolerance();
  const auto& dom = flow.domain();
  tau_samples = std::max(tau_samples, 2);
  for (int k = 0; k < tau_samples; ++k) {
    const double tau = make_axis(dom.lo, dom.hi, tau_samples).at(k);
    const MetricSample g = flow.sample(tau);
    scan.min_H = std::min(scan.min_H, g.H);
    h_ok = h_ok && g.H >= -base_tol * std::max(1.0, std::abs(g.dH));
    for (double v : vmags) {
      const QuantitySample q = muller_d(flow, {0.0, tau}, v);
      const double v2 = v * v;
      const double scale = std::max({1.0, std::abs(g.dH), std::abs(g.ric_unit) * (1 + v2),
                                     std::abs(g.H), g.h_norm2});
      const double tol = base_tol * scale;
      const double r_slack = q.R + K * v2;
      const double d_slack = q.D + 2.0 * K * (g.H + v2);
      scan.min_R_slack = std::min(scan.min_R_slack, r_slack);
      scan.min_D_slack = std::min(scan.min_D_slack, d_slack);
      r_ok = r_ok && r_slack >= -tol;
      d_ok = d_ok && d_slack >= -tol;
      if (tau > 0.0) {
        const double th_slack = q.trace_harnack + g.H / tau;
        scan.min_harnack_slack = std::min(scan.min_harnack_slack, th_slack);
        th_ok = th_ok && th_slack >= -tol * std::max(1.0, 1.0 / tau);
      }
    }
  }
  scan.minus_k_super = r_ok;
  scan.d_bound = d_ok;
  scan.trace_harnack = th_ok;
  scan.h_nonnegative = h_ok;
  return scan;
}

const FormulaCheck& FormulaReport::check(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return c;
  }
  throw DomainError("no formula check named " + name);
}

namespace {

enum CheckId { kDtau, kGrad, kLaplace, kIdentity, kHeatKD, kHeatK, kGradDfrak, kCheckCount };

struct NodeResult {
  bool used = false;
  std::string excluded;
  std::array<double, kCheckCount> value{};
  std::array<double, kCheckCount> error{};
  std::array<bool, kCheckCount> has{};
  double grad_dfrak = std::numeric_limits<double>::quiet_NaN();
};

struct RowData {
  MetricSample g;
  PathIntegrals at0;
  PathIntegrals at1;
};

}  // namespace

FormulaReport verify_derivative_formulas(const FlowMetric& flow, const ReducedField& field,
                                         const FormulaOptions& options) {
  const int n = flow.dimension();
  const bool radial = !flow.model().is_line();
  const bool pole_even = radial && field.rho.lo == 0.0;
  const int nr = field.rho.count;
  const int nt = field.tau.count;
  const int i_lo = pole_even ? 0 : 2;
  const int i_hi = nr - 3;
  const int j_lo = 2;
  const int j_hi = nt - 3;
  if (i_hi - i_lo + 1 < 5 || j_hi - j_lo + 1 < 5) {
    throw DomainError("grid too coarse: fewer than 5 interior nodes in a direction");
  }

  const Field2D ell = field.ell();
  const Field2D lbar = field.Lbar();

  std::vector<RowData> rows(nt);
  parallel_for(
      rows.size(),
      [&](std::size_t j) {
        const double tau = field.tau.at(static_cast<int>(j));
        rows[j].g = flow.sample(tau);
        rows[j].at0 = path_integrals(flow, 0.0, tau, options.convention, 1e-12);
        rows[j].at1 = path_integrals(flow, 1.0, tau, options.convention, 1e-12);
      },
      options.workers);

  const HypothesisScan scan = scan_hypotheses(flow, options.K);
  const bool heat_k_applies = scan.d_bound && scan.h_nonnegative;
  const bool grad_dfrak_applies = scan.trace_harnack && scan.h_nonnegative;

  std::vector<NodeResult> results(static_cast<std::size_t>(nr) * nt);
  parallel_for(
      results.size(),
      [&](std::size_t k) {
        const int i = static_cast<int>(k % nr);
        const int j = static_cast<int>(k / nr);
        if (i < i_lo || i > i_hi || j < j_lo || j > j_hi) return;
        NodeResult& out = results[k];
        // Every stencil point must come from a successful, smooth solve.
        for (int dj = -2; dj <= 2; ++dj) {
          for (int di = -2; di <= 2; ++di) {
            if (di != 0 && dj != 0) continue;
            const int ii = std::abs(i + di);
            const ReducedNode& nb = field.at(ii, j + dj);
            if (nb.status != "ok") {
              out.excluded = "stencil touches failed node: " + nb.status;
              return;
            }
            if (!nb.smooth) {
              out.excluded = "non-smooth reduced distance in stencil";
              return;
            }
          }
        }
        out.used = true;
        const ReducedNode& node = field.at(i, j);
        const RowData& row = rows[j];
        const double tau = node.tau;
        const double a2 = row.g.a * row.g.a;
        const double H = row.g.H;
        const double c2 = node.first_integral * node.first_integral;
        const double KH = row.at0.K_H + c2 * (row.at1.K_H - row.at0.K_H);
        const double KD = row.at0.K_D + c2 * (row.at1.K_D - row.at0.K_D);
        const double t32 = tau * std::sqrt(tau);
        const double cot = radial && node.rho != 0.0 ? cot_kappa(flow.kappa(), node.rho) : 0.0;
        const bool at_pole = radial && node.rho == 0.0;

        auto laplace = [&](const Derivative& d1, const Derivative& d2) {
          if (!radial) return Derivative{d2.value / a2, d2.error / a2};
          if (at_pole) return Derivative{n * d2.value / a2, n * d2.error / a2};
          return Derivative{(d2.value + (n - 1) * cot * d1.value) / a2,
                            (d2.error + (n - 1) * std::abs(cot) * d1.error) / a2};
        };

        const LineSamples ell_r = rho_line(ell, j, pole_even);
        const LineSamples ell_t = tau_line(ell, i);
        const Derivative lt = diff1(ell_t, j);
        const Derivative lr = diff1(ell_r, i);
        const Derivative lrr = diff2(ell_r, i);
        const Derivative lap = laplace(lr, lrr);
        const double grad2 = lr.value * lr.value / a2;
        const double grad2_err = 2.0 * std::abs(lr.value) * lr.error / a2 + lr.error * lr.error / a2;
        const double l = node.ell;

        auto put = [&](CheckId id, double v, double e) {
          out.value[id] = v;
          out.error[id] = e;
          out.has[id] = true;
        };
        put(kDtau, lt.value - (H - l / tau + KH / (2.0 * t32)), lt.error);
        put(kGrad, grad2 + H - l / tau + KH / t32, grad2_err);
        put(kLaplace, (-H + n / (2.0 * tau) - (KH + KD) / (2.0 * t32)) - lap.value, lap.error);
        put(kIdentity, 2.0 * lt.value + grad2 - (H - l / tau), 2.0 * lt.error + grad2_err);

        const LineSamples lb_r = rho_line(lbar, j, pole_even);
        const LineSamples lb_t = tau_line(lbar, i);
        const Derivative bt = diff1(lb_t, j);
        const Derivative br = diff1(lb_r, i);
        const Derivative brr = diff2(lb_r, i);
        const Derivative blap = laplace(br, brr);
        const double heat = blap.value + bt.value;
        const double heat_err = blap.error + bt.error;
        put(kHeatKD, 2.0 * n - 2.0 * KD / std::sqrt(tau) - heat, heat_err);
        if (heat_k_applies) put(kHeatK, 2.0 * n + 2.0 * options.K * node.Lbar - heat, heat_err);
        if (node.Lbar > 1e-12) {
          out.grad_dfrak = br.value * br.value / a2 / (4.0 * node.Lbar);
          const double e = 2.0 * std::abs(br.value) * br.error / a2 / (4.0 * node.Lbar);
          if (grad_dfrak_applies) put(kGradDfrak, options.grad_dfrak_bound - out.grad_dfrak, e);
        }
      },
      options.workers);

  static const std::array<const char*, kCheckCount> names = {
      "dtau_ell", "grad_ell", "laplace_ell", "kh_free_identity", "heat_bound_kd", "heat_bound_k",
      "grad_dfrak_bound"};
  static const std::array<bool, kCheckCount> is_equality = {true, true, false, true,
                                                            false, false, false};

  FormulaReport report;
  report.grad_dfrak_min = std::numeric_limits<double>::infinity();
  report.grad_dfrak_max = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < kCheckCount; ++c) {
    FormulaCheck chk;
    chk.name = names[c];
    chk.equality = is_equality[c];
    chk.tolerance = chk.equality ? options.equality_tolerance : options.inequality_floor;
    chk.applicable = c == kHeatK ? heat_k_applies : (c == kGradDfrak ? grad_dfrak_applies : true);
    chk.worst = chk.equality ? 0.0 : std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t k = 0; k < results.size(); ++k) {
      const NodeResult& r = results[k];
      if (!r.used || !r.has[c]) continue;
      ++chk.nodes_checked;
      const int i = static_cast<int>(k % nr);
      const int j = static_cast<int>(k / nr);
      const GridNode node{i, j, field.rho.at(i), field.tau.at(j)};
      const double v = r.value[c];
      const double e = r.error[c];
      if (!std::isfinite(v)) {
        chk.pass = false;
        if (!any) chk.worst_node = node;
        any = true;
        continue;
      }
      if (chk.equality) {
        if (!any || std::abs(v) > chk.worst) {
          chk.worst = std::abs(v);
          chk.fd_error_at_worst = e;
          chk.worst_node = node;
        }
        if (std::abs(v) > chk.tolerance) chk.pass = false;
      } else {
        if (!any || v < chk.worst) {
          chk.worst = v;
          chk.fd_error_at_worst = e;
          chk.worst_node = node;
        }
        if (v < -(e + chk.tolerance)) chk.pass = false;
      }
      any = true;
    }
    if (!any) chk.worst = 0.0;
    if (chk.applicable) report.pass = report.pass && chk.pass;
    report.checks.push_back(chk);
  }
  for (std::size_t k = 0; k < results.size(); ++k) {
    const NodeResult& r = results[k];
    const int i = static_cast<int>(k % nr);
    const int j = static_cast<int>(k / nr);
    if (!r.excluded.empty()) {
      report.excluded.push_back({{i, j, field.rho.at(i), field.tau.at(j)}, r.excluded});
    }
    if (r.used && std::isfinite(r.grad_dfrak)) {
      report.grad_dfrak_min = std::min(report.grad_dfrak_min, r.grad_dfrak);
      report.grad_dfrak_max = std::max(report.grad_dfrak_max, r.grad_dfrak);
    }
  }
  return report;
}

}  // namespace rflab

#include "rflab/backward_heat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rflab/error.hpp"
#include "rflab/quadrature.hpp"

namespace rflab {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool is_flat_line(const FlowMetric& flow) { return flow.model().is_line(); }

// Fourth-order first derivative in tau; switches to a forward stencil when the
// central one would reach below tau = 0.
double tau_derivative(const std::function<double(double)>& g, double tau, double h) {
  if (tau - 2 * h >= 0.0) {
    return (-g(tau + 2 * h) + 8 * g(tau + h) - 8 * g(tau - h) + g(tau - 2 * h)) / (12 * h);
  }
  return (-25 * g(tau) + 48 * g(tau + h) - 36 * g(tau + 2 * h) + 16 * g(tau + 3 * h) -
          3 * g(tau + 4 * h)) /
         (12 * h);
}

}  // namespace

std::string kind_name(const SolutionKind& kind) {
  return std::visit(Overloaded{[](const heat::Constant&) { return std::string("constant"); },
                               [](const heat::LinearLine&) { return std::string("linear-line"); },
                               [](const heat::ExpLine&) { return std::string("exp-line"); },
                               [](const heat::Eigen&) { return std::string("eigen"); }},
                    kind);
}

CatalogSolution::CatalogSolution(const FlowMetric& flow, SolutionKind kind)
    : flow_(flow), kind_(std::move(kind)) {
  std::visit(Overloaded{
                 [](const heat::Constant&) {},
                 [&](const heat::LinearLine&) {
                   if (!is_flat_line(flow)) throw DomainError("LinearLine needs the flat line (n = 1)");
                 },
                 [&](const heat::ExpLine&) {
                   if (!is_flat_line(flow) || !flow.is_static()) {
                     throw DomainError("ExpLine needs the static flat line");
                   }
                 },
                 [&](const heat::Eigen&) {
                   if (flow.model().curvature != Curvature::Sphere || flow.dimension() < 2) {
                     throw DomainError("Eigen entries are defined on spheres (kappa = +1, n >= 2)");
                   }
                 },
             },
             kind_);
}

double CatalogSolution::growth(double tau) const {
  if (!std::holds_alternative<heat::Eigen>(kind_)) return 1.0;
  const int n = flow_.dimension();
  const double a0 = flow_.scale().a0;
  if (flow_.is_static()) return std::exp(n * tau / (a0 * a0));
  if (std::holds_alternative<scale::BackwardRicci>(flow_.scale().variant)) {
    return std::pow(1.0 + 2.0 * (n - 1) * tau / (a0 * a0), n / (2.0 * (n - 1)));
  }
  const double lo = std::min(0.0, tau), hi = std::max(0.0, tau);
  const double integral = integrate_adaptive(
                              [&](double t) {
                                const double a = flow_.raw_scale(t).a;
                                return n / (a * a);
                              },
                              lo, hi, 1e-15, 1e-14)
                              .value;
  return std::exp(tau >= 0.0 ? integral : -integral);
}

double CatalogSolution::value(double rho, double tau) const {
  return std::visit(
      Overloaded{[&](const heat::Constant& c) { return c.value; },
                 [&](const heat::LinearLine& l) { return l.slope * rho + l.offset; },
                 [&](const heat::ExpLine& e) {
                   const double a0 = flow_.scale().a0;
                   return e.scale * std::exp(rho - tau / (a0 * a0));
                 },
                 [&](const heat::Eigen& e) { return e.amplitude * growth(tau) * std::cos(rho) + e.shift; }},
      kind_);
}

double CatalogSolution::d_rho(double rho, double tau) const {
  return std::visit(Overloaded{[&](const heat::Constant&) { return 0.0; },
                               [&](const heat::LinearLine& l) { return l.slope; },
                               [&](const heat::ExpLine&) { return value(rho, tau); },
                               [&](const heat::Eigen& e) {
                                 return -e.amplitude * growth(tau) * std::sin(rho);
                               }},
                    kind_);
}

double CatalogSolution::d_rhorho(double rho, double tau) const {
  return std::visit(Overloaded{[&](const heat::Constant&) { return 0.0; },
                               [&](const heat::LinearLine&) { return 0.0; },
                               [&](const heat::ExpLine&) { return value(rho, tau); },
                               [&](const heat::Eigen& e) {
                                 return -e.amplitude * growth(tau) * std::cos(rho);
                               }},
                    kind_);
}

double CatalogSolution::d_tau(double rho, double tau) const {
  return std::visit(Overloaded{[&](const heat::Constant&) { return 0.0; },
                               [&](const heat::LinearLine&) { return 0.0; },
                               [&](const heat::ExpLine&) {
                                 const double a0 = flow_.scale().a0;
                                 return -value(rho, tau) / (a0 * a0);
                               },
                               [&](const heat::Eigen& e) {
                                 const double a = flow_.raw_scale(tau).a;
                                 return e.amplitude * growth(tau) * flow_.dimension() / (a * a) *
                                        std::cos(rho);
                               }},
                    kind_);
}

double CatalogSolution::analytic_residual(double rho, double tau) const {
  return laplace_beltrami_radial(flow_, tau, rho, d_rho(rho, tau), d_rhorho(rho, tau)) +
         d_tau(rho, tau);
}

double CatalogSolution::fd_residual(double rho, double tau, double h) const {
  const double lap =
      laplace_beltrami_radial(flow_, [&](double r) { return value(r, tau); }, tau, rho, h);
  const double dt = tau_derivative([&](double t) { return value(rho, t); }, tau, h);
  return lap + dt;
}

HeatSolution exact_solution(const FlowMetric& flow, const SolutionKind& kind, const Axis& rho,
                            const Axis& tau) {
  const CatalogSolution cat(flow, kind);
  HeatSolution sol;
  sol.u = Field2D(rho, tau);
  sol.provenance = "catalog:" + kind_name(kind);
  sol.kind = kind;
  sol.residual_tolerance = 1e-8;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double abs_sup = 0.0;
  sol.sup_by_tau.assign(tau.count, 0.0);
  for (int j = 0; j < tau.count; ++j) {
    for (int i = 0; i < rho.count; ++i) {
      const double r = rho.at(i), t = tau.at(j);
      const double u = cat.value(r, t);
      sol.u(i, j) = u;
      lo = std::min(lo, u);
      hi = std::max(hi, u);
      abs_sup = std::max(abs_sup, std::abs(u));
      sol.sup_by_tau[j] = std::max(sol.sup_by_tau[j], std::abs(u));
      sol.analytic_residual_max = std::max(sol.analytic_residual_max, std::abs(cat.analytic_residual(r, t)));
      sol.residual_max = std::max(sol.residual_max, std::abs(cat.fd_residual(r, t)));
    }
  }
  sol.positive = lo > 0.0;
  sol.A = hi;
  sol.abs_sup = abs_sup;
  return sol;
}

namespace {

struct RadialOperator {
  std::vector<double> x;       // node positions
  std::vector<double> face;    // weight at the face between j and j+1
  std::vector<double> volume;  // integral of the weight over cell j
  double h = 0.0;
  bool fixed_lo = false;  // Dirichlet node at index 0
  bool fixed_hi = false;  // Dirichlet node at the last index

  // Delta u without the 1/a^2 factor.
  void apply(const std::vector<double>& u, std::vector<double>& out) const {
    const std::size_t n = u.size();
    for (std::size_t j = 0; j < n; ++j) {
      if ((j == 0 && fixed_lo) || (j + 1 == n && fixed_hi)) {
        out[j] = 0.0;
        continue;
      }
      const double right = j + 1 < n ? face[j] * (u[j + 1] - u[j]) : 0.0;
      const double left = j > 0 ? face[j - 1] * (u[j] - u[j - 1]) : 0.0;
      out[j] = (right - left) / (h * h * volume[j]);
    }
  }

  double max_diagonal() const {
    double d = 0.0;
    const std::size_t n = x.size();
    for (std::size_t j = 0; j < n; ++j) {
      if ((j == 0 && fixed_lo) || (j + 1 == n && fixed_hi)) continue;
      const double right = j + 1 < n ? face[j] : 0.0;
      const double left = j > 0 ? face[j - 1] : 0.0;
      d = std::max(d, (right + left) / (h * h * volume[j]));
    }
    return d;
  }
};

RadialOperator build_operator(const FlowMetric& flow, double lo, double hi, int nodes,
                              bool fixed_lo, bool fixed_hi) {
  if (nodes < 8) throw DomainError("heat solver needs at least 8 spatial nodes");
  RadialOperator op;
  op.h = (hi - lo) / (nodes - 1);
  op.fixed_lo = fixed_lo;
  op.fixed_hi = fixed_hi;
  const int n = flow.dimension();
  const int kappa = flow.kappa();
  const bool line = flow.model().is_line();
  auto weight = [&](double r) { return line ? 1.0 : std::pow(sn_kappa(kappa, r), n - 1); };
  op.x.resize(nodes);
  for (int j = 0; j < nodes; ++j) op.x[j] = j == nodes - 1 ? hi : lo + j * op.h;
  op.face.resize(nodes - 1);
  for (int j = 0; j + 1 < nodes; ++j) op.face[j] = weight(op.x[j] + 0.5 * op.h);
  op.volume.resize(nodes);
  for (int j = 0; j < nodes; ++j) {
    const double a = std::max(lo, op.x[j] - 0.5 * op.h);
    const double b = std::min(hi, op.x[j] + 0.5 * op.h);
    op.volume[j] = gauss_legendre_5(weight, a, b) / op.h;
  }
  return op;
}

double min_a2(const FlowMetric& flow, double t_hi, double t_lo) {
  double m = std::numeric_limits<double>::infinity();
  for (double t : {t_hi, 0.5 * (t_hi + t_lo), t_lo}) {
    const double a = flow.raw_scale(t).a;
    m = std::min(m, a * a);
  }
  return m;
}

}  // namespace

HeatSolution solve_backward_heat(const FlowMetric& flow,
                                 const std::function<double(double)>& terminal, double T,
                                 double tau_min, const HeatSolveOptions& options) {
  if (!(tau_min > 0.0) || !(T > tau_min)) throw DomainError("need 0 < tau_min < T");
  if (!flow.domain().contains(T) || !flow.domain().contains(tau_min)) {
    throw DomainError("solve interval outside the flow domain");
  }
  if (options.tau_rows < 2) throw DomainError("need at least two output rows");

  const bool line = flow.model().is_line();
  const bool sphere = flow.model().curvature == Curvature::Sphere;
  double lo = 0.0, hi = 0.0;
  bool fixed_lo = false, fixed_hi = false;
  if (line) {
    lo = options.x_lo;
    hi = options.x_hi;
    if (!(hi > lo)) throw DomainError("line window needs x_lo < x_hi");
    fixed_lo = fixed_hi = options.boundary == BoundaryKind::Dirichlet;
  } else if (sphere) {
    hi = std::numbers::pi;
  } else {
    hi = options.rho_max;
    if (!(hi > 0.0)) throw DomainError("non-compact radial solve needs rho_max > 0");
    fixed_hi = options.boundary == BoundaryKind::Dirichlet;
  }
  if ((fixed_lo || fixed_hi) && !options.boundary_value) {
    throw DomainError("Dirichlet boundary needs boundary_value");
  }
  const RadialOperator op = build_operator(flow, lo, hi, options.nodes, fixed_lo, fixed_hi);
  const std::size_t n = op.x.size();
  const double max_d = op.max_diagonal();

  std::vector<double> u(n);
  for (std::size_t j = 0; j < n; ++j) u[j] = terminal(op.x[j]);

  auto impose = [&](std::vector<double>& v, double tau) {
    if (fixed_lo) v.front() = options.boundary_value(op.x.front(), tau);
    if (fixed_hi) v.back() = options.boundary_value(op.x.back(), tau);
  };
  impose(u, T);

  const Axis tau_axis = make_axis(tau_min, T, options.tau_rows);
  std::vector<std::vector<double>> rows(tau_axis.count);
  rows.back() = u;

  std::vector<double> k(n), u1(n), u2(n);
  auto rhs = [&](const std::vector<double>& v, double tau, std::vector<double>& out) {
    op.apply(v, out);
    const double a = flow.raw_scale(tau).a;
    const double inv = 1.0 / (a * a);
    for (double& o : out) o *= inv;
  };

  double tau = T;
  for (int row = tau_axis.count - 2; row >= 0; --row) {
    const double target = tau_axis.at(row);
    while (tau > target) {
      // Step bound uses the smallest a^2 the step can see.
      double dt = options.cfl * min_a2(flow, tau, tau) / max_d;
      dt = options.cfl * min_a2(flow, tau, std::max(target, tau - dt)) / max_d;
      if (!(dt > 1e-14)) throw NumericalError("heat solver: CFL step collapsed");
      const bool last = tau - dt <= target + 1e-14 * std::max(1.0, T);
      if (last) dt = tau - target;
      const double t_end = last ? target : tau - dt;
      // SSPRK3 in t = T - tau.
      rhs(u, tau, k);
      for (std::size_t j = 0; j < n; ++j) u1[j] = u[j] + dt * k[j];
      impose(u1, t_end);
      rhs(u1, t_end, k);
      for (std::size_t j = 0; j < n; ++j) u2[j] = 0.75 * u[j] + 0.25 * (u1[j] + dt * k[j]);
      impose(u2, tau - 0.5 * dt);
      rhs(u2, tau - 0.5 * dt, k);
      for (std::size_t j = 0; j < n; ++j) u[j] = u[j] / 3.0 + 2.0 / 3.0 * (u2[j] + dt * k[j]);
      impose(u, t_end);
      tau = t_end;
      for (double v : u) {
        if (!std::isfinite(v)) throw NumericalError("heat solver produced a non-finite value");
      }
    }
    rows[row] = u;
  }

  // Output rows restricted to the chart.
  std::size_t keep = n;
  if (sphere) {
    keep = 0;
    while (keep < n && op.x[keep] <= flow.rho_max() + 1e-12) ++keep;
  }
  const Axis rho_axis{op.x.front(), op.x[keep - 1], static_cast<int>(keep)};

  HeatSolution sol;
  sol.provenance = "numeric";
  sol.u = Field2D(rho_axis, tau_axis);
  sol.sup_by_tau.assign(tau_axis.count, 0.0);
  double min_u = std::numeric_limits<double>::infinity();
  double max_u = -min_u;
  for (int j = 0; j < tau_axis.count; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      sol.sup_by_tau[j] = std::max(sol.sup_by_tau[j], std::abs(rows[j][i]));
    }
    for (std::size_t i = 0; i < keep; ++i) {
      const double v = rows[j][i];
      sol.u(static_cast<int>(i), j) = v;
      min_u = std::min(min_u, v);
      max_u = std::max(max_u, v);
      sol.abs_sup = std::max(sol.abs_sup, std::abs(v));
    }
  }
  for (int j = 0; j + 1 < tau_axis.count; ++j) {
    if (sol.sup_by_tau[j] > sol.sup_by_tau[j + 1] + 1e-10) sol.max_principle_ok = false;
  }
  sol.positive = min_u > 0.0;
  sol.A = max_u;

  // Consistency of the sampled rows: finite-difference residual against ten
  // times its own Richardson error estimate.
  const bool pole_even = !line;
  double worst_ratio_base = 0.0;
  for (int j = 2; j + 2 < tau_axis.count; ++j) {
    const MetricSample g = flow.sample(tau_axis.at(j));
    const double a2 = g.a * g.a;
    const LineSamples rline = rho_line(sol.u, j, pole_even);
    const int i_lo = pole_even ? 0 : 2;
    for (int i = i_lo; i + 2 < rho_axis.count; ++i) {
      const Derivative d1 = diff1(rline, i);
      const Derivative d2 = diff2(rline, i);
      const Derivative dt = diff1(tau_line(sol.u, i), j);
      const double r = rho_axis.at(i);
      double lap = 0.0, lap_err = 0.0;
      if (line) {
        lap = d2.value / a2;
        lap_err = d2.error / a2;
      } else if (r == 0.0) {
        lap = flow.dimension() * d2.value / a2;
        lap_err = flow.dimension() * d2.error / a2;
      } else {
        const double cot = cot_kappa(flow.kappa(), r);
        lap = (d2.value + (flow.dimension() - 1) * cot * d1.value) / a2;
        lap_err = (d2.error + (flow.dimension() - 1) * std::abs(cot) * d1.error) / a2;
      }
      sol.residual_max = std::max(sol.residual_max, std::abs(lap + dt.value));
      worst_ratio_base = std::max(worst_ratio_base, lap_err + dt.error);
    }
  }
  sol.residual_tolerance = 10.0 * worst_ratio_base + 1e-8;
  return sol;
}

IdentityReport verify_f_w_identities(const FlowMetric& flow, const HeatSolution& sol) {
  const Field2D& u = sol.u;
  const int nr = u.rho.count, nt = u.tau.count;
  const bool radial = !flow.model().is_line();
  const bool pole_even = radial && u.rho.lo == 0.0;
  const int n = flow.dimension();

  Field2D f(u.rho, u.tau);
  for (std::size_t k = 0; k < u.values.size(); ++k) {
    if (!(u.values[k] > 0.0)) throw DomainError("identity check needs u > 0 on the grid");
    f.values[k] = std::log(u.values[k]);
    if (!(f.values[k] < 1.0)) throw DomainError("identity check needs sup log u < 1");
  }
  const int i_lo = pole_even ? 0 : 2;
  if (nr - 3 - i_lo + 1 < 1 || nt - 4 < 1) throw DomainError("grid too small for identity check");

  std::vector<MetricSample> rows(nt);
  for (int j = 0; j < nt; ++j) rows[j] = flow.sample(u.tau.at(j));

  Field2D P(u.rho, u.tau), w(u.rho, u.tau);
  for (int j = 0; j < nt; ++j) {
    const LineSamples fl = rho_line(f, j, pole_even);
    const double a2 = rows[j].a * rows[j].a;
    for (int i = 0; i < nr; ++i) {
      const double fr = diff1(fl, i).value;
      P(i, j) = fr * fr / a2;
      w(i, j) = P(i, j) / ((1.0 - f(i, j)) * (1.0 - f(i, j)));
    }
  }

  IdentityReport rep;
  rep.min_w_slack = std::numeric_limits<double>::infinity();
  for (int j = 2; j + 2 < nt; ++j) {
    const MetricSample& g = rows[j];
    const double a2 = g.a * g.a;
    const LineSamples fl = rho_line(f, j, pole_even);
    const LineSamples pl = rho_line(P, j, pole_even);
    const LineSamples wl = rho_line(w, j, pole_even);
    for (int i = i_lo; i + 2 < nr; ++i) {
      const double r = u.rho.at(i);
      const bool at_pole = radial && r == 0.0;
      const double cot = radial && !at_pole ? cot_kappa(flow.kappa(), r) : 0.0;
      auto laplace = [&](const Derivative& d1, const Derivative& d2) {
        if (!radial) return Derivative{d2.value / a2, d2.error / a2};
        if (at_pole) return Derivative{n * d2.value / a2, n * d2.error / a2};
        return Derivative{(d2.value + (n - 1) * cot * d1.value) / a2,
                          (d2.error + (n - 1) * std::abs(cot) * d1.error) / a2};
      };
      const Derivative fr = diff1(fl, i), frr = diff2(fl, i), ft = diff1(tau_line(f, i), j);
      const Derivative pr = diff1(pl, i), prr = diff2(pl, i), pt = diff1(tau_line(P, i), j);
      const Derivative wr = diff1(wl, i), wrr = diff2(wl, i), wt = diff1(tau_line(w, i), j);
      const Derivative lapf = laplace(fr, frr), lapp = laplace(pr, prr), lapw = laplace(wr, wrr);

      const double fv = f(i, j);
      const double grad2 = fr.value * fr.value / a2;
      const double hess2 = at_pole ? n * std::pow(frr.value / a2, 2)
                                   : std::pow(frr.value / a2, 2) +
                                         (n - 1) * std::pow(cot * fr.value / a2, 2);
      const double Rf = (g.ric_unit - g.h_unit) * P(i, j);

      const double res_f = std::abs(lapf.value + ft.value + grad2);
      const double res_p = std::abs(lapp.value + pt.value -
                                    (2.0 * hess2 - 2.0 * pr.value * fr.value / a2 + 2.0 * Rf));
      const double one_minus = 1.0 - fv;
      const double wv = w(i, j);
      const double slack = lapw.value + wt.value -
                           2.0 * fv * (wr.value * fr.value / a2) / one_minus -
                           2.0 * one_minus * wv * wv - 2.0 * Rf / (one_minus * one_minus);
      ++rep.nodes_checked;
      if (res_f > rep.residual_f) {
        rep.residual_f = res_f;
        rep.worst_f_i = i;
        rep.worst_f_j = j;
      }
      if (res_p > rep.residual_p) {
        rep.residual_p = res_p;
        rep.worst_p_i = i;
        rep.worst_p_j = j;
      }
      if (slack < rep.min_w_slack) {
        rep.min_w_slack = slack;
        rep.w_slack_fd_error = lapw.error + wt.error;
        rep.worst_w_i = i;
        rep.worst_w_j = j;
      }
    }
  }
  return rep;
}

}  // namespace rflab

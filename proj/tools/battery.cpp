#include "battery.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "rflab/backward_heat.hpp"
#include "rflab/error.hpp"
#include "rflab/flow_quantities.hpp"
#include "rflab/k_scaling.hpp"
#include "rflab/lgeodesic.hpp"
#include "rflab/report.hpp"
#include "rflab/scenario.hpp"
#include "rflab/sz_harness.hpp"

namespace rflab::battery {

namespace {

// Task output before anything touches the disk.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Json>> rows;

  void add(std::vector<Json> row) { rows.push_back(std::move(row)); }
};

void write_table(const std::filesystem::path& path, const Table& table) {
  CsvWriter csv(path, table.header);
  for (const auto& row : table.rows) {
    for (const Json& c : row) {
      if (c.is_boolean()) {
        csv.cell(c.get<bool>());
      } else if (c.is_number_integer()) {
        csv.cell(c.get<long long>());
      } else if (c.is_number()) {
        csv.cell(c.get<double>());
      } else if (c.is_null()) {
        csv.cell(std::numeric_limits<double>::quiet_NaN());
      } else {
        csv.cell(c.get<std::string>());
      }
    }
    csv.end_row();
  }
}

Json grid_json(const Axis& rho, const Axis& tau) {
  return {{"rho", {{"min", rho.lo}, {"max", rho.hi}, {"nodes", rho.count}}},
          {"tau", {{"min", tau.lo}, {"max", tau.hi}, {"nodes", tau.count}}}};
}

Json node_json(const GridNode& n) {
  return {{"i", n.i}, {"j", n.j}, {"rho", n.rho}, {"tau", n.tau}};
}

Json base_report(const std::string& task, const ScenarioConfig& cfg) {
  return {{"schema_version", kSchemaVersion}, {"task", task}, {"seed", cfg.seed}};
}

std::string rational_text(const Rational& q) { return q.str(); }

Json constants_json(const EstimateConstants& c) {
  return {{"n", c.n},
          {"C_alpha", c.C_alpha},
          {"C", c.C},
          {"Cbar", c.Cbar},
          {"Ctilde1", c.Ctilde1},
          {"Ctilde2", c.Ctilde2},
          {"C_n", c.C_n},
          {"exact",
           {{"Cbar", rational_text(c.Cbar_exact)},
            {"Ctilde1", rational_text(c.Ctilde1_exact)},
            {"Ctilde2", rational_text(c.Ctilde2_exact)}}}};
}

Json certification_json(const CutoffCertification& c) {
  return {{"grid", c.grid},
          {"points_checked", c.points_checked},
          {"max_dr_quotient", c.max_dr_quotient},
          {"max_drr_quotient", c.max_drr_quotient},
          {"max_dtau_quotient", c.max_dtau_quotient},
          {"plateau_ok", c.plateau_ok},
          {"support_ok", c.support_ok},
          {"monotone_ok", c.monotone_ok},
          {"pass", c.pass}};
}

Json formula_json(const FormulaReport& rep) {
  Json checks = Json::array();
  for (const auto& c : rep.checks) {
    checks.push_back({{"name", c.name},
                      {"kind", c.equality ? "equality" : "inequality"},
                      {"applicable", c.applicable},
                      {c.equality ? "max_residual" : "min_slack", c.worst},
                      {"fd_error_at_worst", c.fd_error_at_worst},
                      {"tolerance", c.tolerance},
                      {"worst_node", node_json(c.worst_node)},
                      {"nodes_checked", c.nodes_checked},
                      {"pass", c.pass}});
  }
  std::map<std::string, std::size_t> excluded;
  for (const auto& e : rep.excluded) ++excluded[e.reason];
  Json ex = Json::object();
  for (const auto& [reason, count] : excluded) ex[reason] = count;
  return {{"checks", checks},
          {"grad_dfrak_sq", {{"min", rep.grad_dfrak_min}, {"max", rep.grad_dfrak_max}}},
          {"excluded", ex},
          {"pass", rep.pass}};
}

ReducedFieldOptions field_options(const ScenarioConfig& cfg) {
  ReducedFieldOptions o;
  o.multistart = cfg.multistart;
  o.shooting.seed = cfg.seed;
  o.workers = cfg.workers;
  return o;
}

// ---------------------------------------------------------------- tasks

TaskResult reduced_field_task(const ScenarioConfig& cfg, Table& table) {
  const FlowMetric flow = build_flow(cfg);
  const Axis rho = rho_axis(cfg.grid), tau = tau_axis(cfg.grid);
  const ReducedField field = reduced_field(flow, rho, tau, field_options(cfg));

  TaskResult out;
  out.report = base_report("reduced-field", cfg);
  out.report["flow"] = flow_json(flow);
  out.report["grid"] = grid_json(rho, tau);
  out.report["multistart"] = cfg.multistart;

  std::size_t non_smooth = 0, bad = 0;
  double static_err = 0.0;
  table.header = {"rho", "tau", "L", "ell", "Lbar", "dfrak", "smooth"};
  for (const auto& n : field.nodes) {
    if (!n.smooth) ++non_smooth;
    if (n.status != "ok") ++bad;
    if (flow.is_static()) {
      // d = a0 |rho| on every static model inside the chart.
      const double d = flow.scale().a0 * std::abs(n.rho);
      const double exact = d * d / (4.0 * n.tau);
      const double err = exact == 0.0 ? std::abs(n.ell) : std::abs(n.ell - exact) / exact;
      static_err = std::max(static_err, err);
    }
    table.add({n.rho, n.tau, n.L, n.ell, n.Lbar, n.dfrak, n.smooth});
  }
  out.report["nodes"] = field.nodes.size();
  out.report["non_smooth_nodes"] = non_smooth;
  out.report["failed_nodes"] = bad;
  out.pass = bad == 0;
  if (flow.is_static()) {
    out.report["static_oracle"] = {{"formula", "ell = d^2 / (4 tau)"},
                                   {"max_relative_error", static_err},
                                   {"tolerance", 1e-8}};
    out.pass = out.pass && static_err <= 1e-8;
  }
  out.report["pass"] = out.pass;
  return out;
}

TaskResult lgeodesic_task(const ScenarioConfig& cfg, Table& table) {
  const FlowMetric flow = build_flow(cfg);
  const SpaceTimePoint target{cfg.lgeodesic.rho, cfg.lgeodesic.tau};
  GeodesicOptions g;
  g.knots = static_cast<std::size_t>(cfg.lgeodesic.knots);

  const LGeodesic fi = solve_minimal_l_geodesic(flow, target, g);
  ShootingOptions so;
  so.seed = cfg.seed;
  so.geodesic = g;
  const ShootingResult sh = shoot_minimal_l_geodesic(flow, target, so);
  const LGeodesic var =
      variational_refine(flow, straight_curve(target, std::max<std::size_t>(g.knots, 256)));
  const PathIntegrals pi = path_integrals(flow, fi, cfg.convention);

  const double ref = std::max(1.0, std::abs(fi.l_length));
  const double gap_shoot = std::abs(sh.geodesic.l_length - fi.l_length) / ref;
  const double gap_var = std::abs(var.l_length - fi.l_length) / ref;

  TaskResult out;
  out.report = base_report("lgeodesic", cfg);
  out.report["flow"] = flow_json(flow);
  out.report["target"] = {{"rho", target.rho}, {"tau", target.tau}};
  out.report["methods"] = {
      {"first_integral", {{"L", fi.l_length}, {"first_integral", fi.first_integral},
                          {"v_inf", fi.v_inf}, {"drift", fi.first_integral_drift}}},
      {"shooting", {{"L", sh.geodesic.l_length}, {"v_inf", sh.geodesic.v_inf},
                    {"roots", sh.roots}, {"smooth", sh.smooth}}},
      {"variational", {{"L", var.l_length}, {"knots", var.curve.tau.size()}}}};
  const double ell = fi.l_length / (2.0 * std::sqrt(target.tau));
  out.report["reduced"] = {{"ell", ell}, {"Lbar", 4.0 * target.tau * ell},
                           {"dfrak", std::sqrt(std::max(0.0, 4.0 * target.tau * ell))}};
  out.report["path_integrals"] = {{"convention", to_string(cfg.convention)}, {"K_H", pi.K_H},
                                  {"K_D", pi.K_D}, {"error", pi.error}};
  out.report["agreement"] = {{"shooting_vs_first_integral", gap_shoot},
                             {"variational_vs_first_integral", gap_var},
                             {"tolerance", 1e-4}};
  out.pass = gap_shoot <= 1e-4 && gap_var <= 1e-4;
  out.report["pass"] = out.pass;

  table.header = {"tau", "rho", "drho_dtau"};
  for (std::size_t k = 0; k < fi.curve.tau.size(); ++k) {
    table.add({fi.curve.tau[k], fi.curve.rho[k], fi.tangent[k]});
  }
  return out;
}

TaskResult derivative_check_task(const ScenarioConfig& cfg, Table& table) {
  const FlowMetric flow = build_flow(cfg);
  const Axis rho = rho_axis(cfg.grid), tau = tau_axis(cfg.grid);
  const ReducedField field = reduced_field(flow, rho, tau, field_options(cfg));
  FormulaOptions fo;
  fo.K = cfg.estimate.K;
  fo.workers = cfg.workers;
  const FormulaReport def = verify_derivative_formulas(flow, field, fo);

  TaskResult out;
  out.report = base_report("derivative-check", cfg);
  out.report["flow"] = flow_json(flow);
  out.report["grid"] = grid_json(rho, tau);
  out.report["K"] = fo.K;
  out.report["definition"] = formula_json(def);
  if (cfg.convention == MullerConvention::Remark) {
    fo.convention = MullerConvention::Remark;
    out.report["remark"] = formula_json(verify_derivative_formulas(flow, field, fo));
  }
  out.pass = def.pass;
  out.report["pass"] = out.pass;

  table.header = {"check", "kind", "worst", "fd_error", "tolerance", "i", "j", "pass"};
  for (const auto& c : def.checks) {
    table.add({c.name, c.equality ? "equality" : "inequality", c.worst, c.fd_error_at_worst,
               c.tolerance, c.worst_node.i, c.worst_node.j, c.pass});
  }
  return out;
}

Json heat_json(const HeatSolution& sol) {
  return {{"provenance", sol.provenance},
          {"positive", sol.positive},
          {"A", sol.A},
          {"abs_sup", sol.abs_sup},
          {"residual_max", sol.residual_max},
          {"analytic_residual_max", sol.kind ? Json(sol.analytic_residual_max) : Json()},
          {"residual_tolerance", sol.residual_tolerance},
          {"max_principle_ok", sol.max_principle_ok},
          {"grid", grid_json(sol.u.rho, sol.u.tau)}};
}

TaskResult heat_solve_task(const ScenarioConfig& cfg, Table& table) {
  const FlowMetric flow = build_flow(cfg);
  const HeatSolution sol = build_heat_solution(flow, cfg);

  TaskResult out;
  out.report = base_report("heat-solve", cfg);
  out.report["flow"] = flow_json(flow);
  out.report["solution"] = heat_json(sol);
  out.pass = sol.residual_max <= sol.residual_tolerance && sol.max_principle_ok;
  if (!sol.kind) {
    const CatalogSolution exact(flow, catalog_kind(cfg.heat, cfg.heat.terminal));
    double err = 0.0;
    for (int j = 0; j < sol.u.tau.count; ++j) {
      for (int i = 0; i < sol.u.rho.count; ++i) {
        err = std::max(err, std::abs(sol.u(i, j) - exact.value(sol.u.rho.at(i), sol.u.tau.at(j))));
      }
    }
    out.report["max_error_vs_catalog"] = err;
  }
  out.report["pass"] = out.pass;

  table.header = {"rho", "tau", "u"};
  for (int j = 0; j < sol.u.tau.count; ++j) {
    for (int i = 0; i < sol.u.rho.count; ++i) {
      table.add({sol.u.rho.at(i), sol.u.tau.at(j), sol.u(i, j)});
    }
  }
  return out;
}

TaskResult identity_check_task(const ScenarioConfig& cfg, Table& table) {
  const FlowMetric flow = build_flow(cfg);
  const HeatSolution sol = build_heat_solution(flow, cfg);

  TaskResult out;
  out.report = base_report("identity-check", cfg);
  out.report["flow"] = flow_json(flow);
  out.report["solution"] = heat_json(sol);

  table.header = {"rho", "tau", "u", "f"};
  for (int j = 0; j < sol.u.tau.count; ++j) {
    for (int i = 0; i < sol.u.rho.count; ++i) {
      const double u = sol.u(i, j);
      table.add({sol.u.rho.at(i), sol.u.tau.at(j), u,
                 u > 0.0 ? Json(std::log(u)) : Json()});
    }
  }

  std::string reason;
  if (!sol.positive) reason = "solution is not positive on the grid";
  else if (std::log(sol.A) >= 1.0) reason = "sup log u >= 1 on the grid";
  if (!reason.empty()) {
    out.report["status"] = "inapplicable";
    out.report["reasons"] = {reason};
    out.pass = true;
    return out;
  }
  const IdentityReport id = verify_f_w_identities(flow, sol);
  constexpr double kTol = 1e-3;
  out.pass = id.residual_f <= kTol && id.residual_p <= kTol && id.min_w_slack >= -kTol;
  out.report["status"] = out.pass ? "pass" : "fail";
  out.report["identities"] = {
      {"residual_f", id.residual_f},
      {"residual_p", id.residual_p},
      {"min_w_slack", id.min_w_slack},
      {"w_slack_fd_error", id.w_slack_fd_error},
      {"nodes_checked", id.nodes_checked},
      {"worst_f", {{"i", id.worst_f_i}, {"j", id.worst_f_j}}},
      {"worst_p", {{"i", id.worst_p_i}, {"j", id.worst_p_j}}},
      {"worst_w", {{"i", id.worst_w_i}, {"j", id.worst_w_j}}},
      {"tolerance", kTol}};
  return out;
}

TaskResult grad_check_task(const ScenarioConfig& cfg, Table& table) {
  const FlowMetric flow = build_flow(cfg);
  const HeatSolution sol = build_heat_solution(flow, cfg);
  const ReducedField field = reduced_field(flow, sol.u.rho, sol.u.tau, field_options(cfg));
  const double A = cfg.estimate.A.value_or(sol.A);

  TaskResult out;
  out.report = base_report("grad-check", cfg);
  out.report["flow"] = flow_json(flow);
  out.report["solution"] = heat_json(sol);
  out.report["K"] = cfg.estimate.K;
  out.report["A"] = A;

  EstimateOptions eo;
  eo.keep_nodes = true;
  eo.workers = cfg.workers;
  Json regions = Json::array();
  bool any_fail = false, any_inapplicable = false;
  table.header = {"R", "T", "rho", "tau", "lhs", "rhs", "ratio"};
  for (std::size_t k = 0; k < cfg.estimate.R.size(); ++k) {
    const double R = cfg.estimate.R[k], T = cfg.estimate.T[k];
    const Cutoff cutoff = build_cutoff(R, T, cfg.estimate.cutoff_grid);
    const EstimateConstants consts = estimate_constants(flow.dimension(), cutoff);
    const EstimateReport rep =
        gradient_estimate_check(flow, sol, field, R, T, cfg.estimate.K, A, consts, eo);
    any_fail = any_fail || rep.status == "fail";
    any_inapplicable = any_inapplicable || rep.status == "inapplicable";
    regions.push_back({{"R", R},
                       {"T", T},
                       {"status", rep.status},
                       {"reasons", rep.reasons},
                       {"region", rep.region},
                       {"scale_factor", rep.scale_factor},
                       {"nodes_in_region", rep.nodes_in_region},
                       {"nodes_excluded", rep.nodes_excluded},
                       {"region_truncated", rep.region_truncated},
                       {"sup_u_on_QRT", rep.sup_u_on_QRT},
                       {"worst", {{"rho", rep.worst.rho}, {"tau", rep.worst.tau},
                                  {"lhs", rep.worst.lhs}, {"rhs", rep.worst.rhs},
                                  {"ratio", rep.worst.ratio}}},
                       {"margin", rep.margin},
                       {"constants", constants_json(consts)},
                       {"cutoff_certification", certification_json(cutoff.certification())}});
    for (const auto& n : rep.nodes) table.add({R, T, n.rho, n.tau, n.lhs, n.rhs, n.ratio});
  }
  out.report["regions"] = regions;
  // A failed precondition is reported, not counted as a check failure.
  out.report["status"] = any_fail ? "fail" : any_inapplicable ? "inapplicable" : "pass";
  out.pass = !any_fail;
  return out;
}

TaskResult liouville_task(const ScenarioConfig& cfg, Table& table) {
  const FlowMetric flow = build_flow(cfg);
  const HeatSolution sol = build_heat_solution(flow, cfg);
  const ReducedField field = reduced_field(flow, sol.u.rho, sol.u.tau, field_options(cfg));
  // C_alpha and C do not depend on (R, T), so a unit cutoff suffices.
  const Cutoff cutoff = build_cutoff(1.0, 1.0, cfg.estimate.cutoff_grid);
  const EstimateConstants consts = estimate_constants(flow.dimension(), cutoff);
  const SpaceTimePoint probe{cfg.liouville.probe_rho, cfg.liouville.probe_tau};
  const LiouvilleReport rep = liouville_sweep(flow, sol, field, cfg.liouville.R_list, probe, consts);

  TaskResult out;
  out.report = base_report("liouville-sweep", cfg);
  out.report["flow"] = flow_json(flow);
  out.report["solution"] = heat_json(sol);
  out.report["mode"] = rep.mode;
  out.report["classification"] = rep.classification;
  out.report["loglog_slope"] = rep.loglog_slope;
  out.report["strictly_decreasing"] = rep.strictly_decreasing;
  out.report["probe"] = {{"rho", probe.rho}, {"tau", probe.tau}, {"dfrak", rep.probe_dfrak},
                         {"grad_u", rep.probe_grad_u}};
  out.report["C_n"] = rep.C_n;
  Json rows = Json::array();
  table.header = {"R", "A_R", "bound", "nodes", "probe_inside"};
  for (const auto& r : rep.rows) {
    rows.push_back({{"R", r.R}, {"A_R", r.A_R}, {"bound", r.bound}, {"nodes", r.nodes},
                    {"probe_inside", r.probe_inside}});
    table.add({r.R, r.A_R, r.bound, static_cast<long long>(r.nodes), r.probe_inside});
  }
  out.report["rows"] = rows;
  // The classification is the result; there is nothing to assert.
  out.pass = true;
  return out;
}

int forward_dimension(const ScenarioConfig& cfg) {
  if (cfg.model.dimension < 2) throw ConfigError("config: forward flows need model.n >= 2");
  return cfg.model.dimension;
}

std::vector<double> default_t_grid(int n, Curvature k, double K, double a0) {
  const double te = k_ricci_extinction_time(n, k, K, a0);
  const double hi = std::isfinite(te) ? std::min(0.9 * te, 2.0) : 2.0;
  std::vector<double> t(50);
  for (int i = 0; i < 50; ++i) t[i] = hi * (i + 1) / 50.0;
  return t;
}

TaskResult scaling_task(const ScenarioConfig& cfg, Table& table) {
  const int n = forward_dimension(cfg);
  const Curvature kc = cfg.model.curvature;
  const double a0 = cfg.scale.a0;

  TaskResult out;
  out.report = base_report("scaling-check", cfg);
  out.report["model"] = {{"n", n}, {"kappa", sign(kc)}, {"a0", a0}, {"time", "forward t"}};
  Json per_k = Json::array();
  table.header = {"K", "s", "t", "a_bar", "a"};
  for (double K : cfg.scaling.K) {
    const SigmaCheck sc = sigma_pair_check(K, 10000, cfg.seed);
    const std::vector<double> tg =
        cfg.scaling.t_grid.empty() ? default_t_grid(n, kc, K, a0) : cfg.scaling.t_grid;
    const double t_hi = *std::max_element(tg.begin(), tg.end());
    const ForwardFlow src = make_forward_k_ricci(n, kc, K, a0, 0.0, t_hi);
    const TransformedFlow tf = transform_to_ricci_flow(src, K);
    const TransformReport tr = check_transform(tf);
    bool ok = sc.max_inverse_error <= 1e-12 && sc.max_derivative_error <= 1e-12 &&
              sc.max_fd_derivative_error <= 1e-12 && tr.pass;
    Json entry = {{"K", K},
                  {"sigma", {{"samples", sc.samples}, {"max_inverse_error", sc.max_inverse_error},
                             {"max_derivative_error", sc.max_derivative_error},
                             {"max_complex_step_error", sc.max_fd_derivative_error}}},
                  {"transform", {{"t_range", {0.0, t_hi}}, {"s_range", {tf.s_lo(), tf.s_hi()}},
                                 {"source_residual", tr.source_residual},
                                 {"ricci_residual_fd", tr.ricci_residual_fd},
                                 {"ricci_residual_exact", tr.ricci_residual_exact},
                                 {"round_trip_error", tr.round_trip_error},
                                 {"initial_mismatch", tr.initial_mismatch},
                                 {"pass", tr.pass}}}};
    if (kc == Curvature::Sphere && K > 0.0) {
      // Stationary balance a^2 = (n-1)/K maps onto the shrinking sphere.
      const double ab = std::sqrt((n - 1.0) / K);
      const ForwardFlow bal = make_forward_k_ricci(n, kc, K, ab, 0.0, 2.0);
      const TransformedFlow tb = transform_to_ricci_flow(bal, K);
      double err = 0.0;
      for (int i = 0; i <= 100; ++i) {
        const double s = tb.s_lo() + (tb.s_hi() - tb.s_lo()) * i / 100.0;
        const double exact = std::sqrt(ab * ab - 2.0 * (n - 1.0) * s);
        err = std::max(err, std::abs(tb.scale(s).a - exact) / exact);
      }
      entry["balance"] = {{"a0", ab}, {"max_relative_error_vs_shrinking_sphere", err}};
      ok = ok && err <= 1e-10;
    }
    entry["pass"] = ok;
    out.pass = out.pass && ok;
    per_k.push_back(entry);
    for (int i = 0; i <= 50; ++i) {
      const double s = tf.s_lo() + (tf.s_hi() - tf.s_lo()) * i / 50.0;
      const double t = sigma_eval(K, s);
      table.add({K, s, t, tf.scale(s).a, src.scale(t).a});
    }
  }
  out.report["results"] = per_k;
  out.report["pass"] = out.pass;
  return out;
}

Json harnack_json(const HarnackReport& h) {
  return {{"variant", h.variant}, {"status", h.status}, {"K", h.K}, {"min_lhs", h.min_lhs},
          {"worst_t", h.worst_t}, {"worst_v", h.worst_v}, {"samples", h.samples},
          {"tolerance", -1e-9}};
}

TaskResult harnack_task(const ScenarioConfig& cfg, Table& table) {
  const int n = forward_dimension(cfg);
  const Curvature kc = cfg.model.curvature;
  const double a0 = cfg.scale.a0;

  std::vector<double> ancient = cfg.scaling.ancient_t_grid;
  if (ancient.empty()) {
    for (int i = 0; i <= 50; ++i) ancient.push_back(-3.0 + 3.0 * i / 50.0);
  }
  const double anc_lo = *std::min_element(ancient.begin(), ancient.end());

  TaskResult out;
  out.report = base_report("harnack-check", cfg);
  out.report["model"] = {{"n", n}, {"kappa", sign(kc)}, {"a0", a0}, {"time", "forward t"}};
  out.report["v_grid"] = cfg.scaling.v_grid;
  Json results = Json::array();
  table.header = {"K", "variant", "t", "v", "lhs"};
  for (double K : cfg.scaling.K) {
    const std::vector<double> tg =
        cfg.scaling.t_grid.empty() ? default_t_grid(n, kc, K, a0) : cfg.scaling.t_grid;
    const double t_hi = *std::max_element(tg.begin(), tg.end());
    const ForwardFlow fwd = make_forward_k_ricci(n, kc, K, a0, 0.0, t_hi);
    const HarnackReport fin = k_trace_harnack_check(fwd, K, tg, cfg.scaling.v_grid);
    const ForwardFlow past = make_forward_k_ricci(n, kc, K, a0, anc_lo, 0.0);
    const HarnackReport anc = k_ancient_harnack_check(past, K, ancient, cfg.scaling.v_grid);
    for (const HarnackReport* h : {&fin, &anc}) {
      results.push_back(harnack_json(*h));
      out.pass = out.pass && h->status != "fail";
      for (const auto& r : h->rows) table.add({K, h->variant, r.t, r.v, r.lhs});
    }
  }
  out.report["results"] = results;
  out.report["pass"] = out.pass;
  return out;
}

TaskResult kfrdv_task(const ScenarioConfig& cfg, Table& table) {
  const FlowMetric flow = build_flow(cfg);
  const KfrdvReport rep = kfrdv_check(flow, cfg.scaling.v_grid);

  TaskResult out;
  out.report = base_report("kfrdv-check", cfg);
  out.report["flow"] = flow_json(flow);
  out.report["K"] = rep.K;
  out.report["evolution_residual"] = rep.evolution_residual;
  out.report["d_identity_residual"] = rep.d_identity_residual;
  out.report["trace_residual"] = rep.trace_residual;
  out.report["samples"] = rep.samples;
  out.report["tolerance"] = rep.tolerance;
  out.pass = rep.pass;
  out.report["pass"] = out.pass;

  table.header = {"tau", "v", "S", "H", "D", "minus_2K_H_plus_v2"};
  const auto dom = flow.domain();
  for (int k = 0; k <= 20; ++k) {
    const double tau = dom.lo + (dom.hi - dom.lo) * k / 20.0;
    const MetricSample m = flow.sample(tau);
    for (double v : cfg.scaling.v_grid) {
      const QuantitySample q = muller_d(flow, {0.0, tau}, v);
      table.add({tau, v, m.scalar, m.H, q.D, -2.0 * rep.K * (m.H + v * v)});
    }
  }
  return out;
}

}  // namespace

const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names = {
      "reduced-field", "lgeodesic",      "derivative-check", "heat-solve",  "identity-check",
      "grad-check",    "liouville-sweep", "scaling-check",   "harnack-check", "kfrdv-check"};
  return names;
}

Json flow_json(const FlowMetric& flow) {
  Json scale = std::visit(
      [](const auto& v) -> Json {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, scale::Static>) return {{"variant", "static"}};
        if constexpr (std::is_same_v<V, scale::BackwardRicci>) return {{"variant", "backward_ricci"}};
        if constexpr (std::is_same_v<V, scale::BackwardKRicci>) {
          return {{"variant", "backward_k_ricci"}, {"K", v.K}};
        }
        if constexpr (std::is_same_v<V, scale::Tabulated>) {
          return {{"variant", "tabulated"}, {"samples", v.tau.size()}};
        }
      },
      flow.scale().variant);
  if (!flow.is_tabulated()) scale["a0"] = flow.scale().a0;
  return {{"n", flow.dimension()},
          {"kappa", flow.kappa()},
          {"scale", scale},
          {"tau", {{"min", flow.domain().lo}, {"max", flow.domain().hi}}}};
}

void write_json(const std::filesystem::path& path, const Json& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << report.dump(2) << '\n';
}

TaskResult run_task(const std::string& task, const ScenarioConfig& config) {
  if (!config.task.empty() && config.task != task) {
    throw ConfigError("config: task '" + config.task + "' does not match subcommand '" + task + "'");
  }
  Table table;
  TaskResult result;
  if (task == "reduced-field") result = reduced_field_task(config, table);
  else if (task == "lgeodesic") result = lgeodesic_task(config, table);
  else if (task == "derivative-check") result = derivative_check_task(config, table);
  else if (task == "heat-solve") result = heat_solve_task(config, table);
  else if (task == "identity-check") result = identity_check_task(config, table);
  else if (task == "grad-check") result = grad_check_task(config, table);
  else if (task == "liouville-sweep") result = liouville_task(config, table);
  else if (task == "scaling-check") result = scaling_task(config, table);
  else if (task == "harnack-check") result = harnack_task(config, table);
  else if (task == "kfrdv-check") result = kfrdv_task(config, table);
  else throw ConfigError("unknown task '" + task + "'");

  std::filesystem::create_directories(config.output_dir);
  write_json(config.output_dir / "report.json", result.report);
  write_table(config.output_dir / "data.csv", table);
  return result;
}

}  // namespace rflab::battery

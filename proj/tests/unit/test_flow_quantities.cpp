#include <doctest.h>

#include <cmath>
#include <random>

#include "../oracles/frozen_oracles.hpp"
#include "rflab/error.hpp"
#include "rflab/flow_quantities.hpp"
#include "rflab/lgeodesic.hpp"

using namespace rflab;

namespace {

FlowMetric sphere_ricci(int n = 2) {
  return make_flow({n, Curvature::Sphere}, {scale::BackwardRicci{}, 1.0}, {0.0, 2.0});
}
FlowMetric static_model(int n, Curvature k, double a0 = 1.0) {
  return make_flow({n, k}, {scale::Static{}, a0}, {0.0, 2.0});
}

}  // namespace

TEST_CASE("Mueller quantity examples") {
  // Static: D(V) = 2 Ric(V, V) under the definition, Ric(V, V) under the remark.
  const FlowMetric s = static_model(3, Curvature::Sphere, 2.0);
  const QuantitySample def = muller_d(s, {0.5, 1.0}, 1.0);
  CHECK(def.D == doctest::Approx(2.0 * 2.0 / 4.0));
  const QuantitySample rem = muller_d(s, {0.5, 1.0}, 1.0, MullerConvention::Remark);
  CHECK(rem.D == doctest::Approx(2.0 / 4.0));

  for (double v : {0.0, 0.5, 1.0, 2.0}) CHECK(std::abs(muller_d(sphere_ricci(), {0.3, 0.8}, v).D) <= 1e-12);

  const FlowMetric kr = make_flow({2, Curvature::Sphere}, {scale::BackwardKRicci{0.5}, 1.0}, {0.0, 1.0});
  for (double tau : {0.0, 0.4, 1.0}) {
    const double H = kr.sample(tau).H;
    CHECK(muller_d(kr, {0.2, tau}, 1.0).D == doctest::Approx(-2.0 * 0.5 * (H + 1.0)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(muller_d(kr, {0.2, 1.5}, 1.0), DomainError);
}

TEST_CASE("trace Harnack quantity") {
  for (double tau : {0.1, 1.0, 2.0}) CHECK(trace_harnack_h(static_model(2, Curvature::Sphere), {0.4, tau}, 1.3) == 0.0);
  const FlowMetric f = sphere_ricci();
  CHECK(trace_harnack_h(f, {0.0, 1.0}, 0.0) == doctest::Approx(oracle::kShrinkHarnackV0).epsilon(1e-13));
  CHECK(trace_harnack_h(f, {0.0, 1.0}, 1.0) == doctest::Approx(oracle::kShrinkHarnackV1).epsilon(1e-13));
  CHECK_THROWS_AS(trace_harnack_h(f, {0.0, 0.0}, 1.0), DomainError);

  // -dH/dtau against a centred difference of H.
  const double h = 1e-4;
  const double fd = (f.sample(1.0 + h).H - f.sample(1.0 - h).H) / (2 * h);
  CHECK(f.sample(1.0).dH == doctest::Approx(fd).epsilon(1e-7));
}

TEST_CASE("path integrals") {
  const FlowMetric stat = static_model(2, Curvature::Flat);
  const LGeodesic g = solve_minimal_l_geodesic(stat, {1.3, 0.9});
  CHECK(path_integrals(stat, g).K_H == doctest::Approx(0.0));

  const FlowMetric f = sphere_ricci();
  CHECK(path_integrals(f, 0.0, 1.0).K_H == doctest::Approx(oracle::kShrinkKHPole).epsilon(1e-9));
  for (double c : {0.0, 0.4, 1.1}) CHECK(std::abs(path_integrals(f, c, 1.2).K_D) <= 1e-9);
  const LGeodesic gs = solve_minimal_l_geodesic(f, {0.9, 1.0});
  CHECK(std::abs(path_integrals(f, gs).K_D) <= 1e-9);
}

TEST_CASE("hypothesis scans") {
  const HypothesisScan r = scan_hypotheses(sphere_ricci(), 0.0);
  CHECK(r.minus_k_super);
  CHECK(r.d_bound);
  CHECK(r.trace_harnack);
  CHECK(r.h_nonnegative);
  const FlowMetric hyp =
      make_flow({2, Curvature::Hyperbolic}, {scale::BackwardRicci{}, 1.0}, {0.0, 0.4});
  CHECK_FALSE(scan_hypotheses(hyp, 0.0).h_nonnegative);
}

TEST_CASE("derivative formulas on the static line at (2, 1)") {
  // Grid through (2, 1) with spacing 0.01.
  const FlowMetric f = make_flow({1, Curvature::Flat}, {scale::Static{}, 1.0}, {0.0, 2.0});
  ReducedFieldOptions fo;
  fo.multistart = false;
  const ReducedField field = reduced_field(f, make_axis(1.95, 2.05, 11), make_axis(0.95, 1.05, 11), fo);
  CHECK(field.at(5, 5).rho == doctest::Approx(2.0));
  CHECK(field.at(5, 5).tau == doctest::Approx(1.0));
  const double h = 0.01;
  const double dtau = (field.at(5, 6).ell - field.at(5, 4).ell) / (2 * h);
  const double drho = (field.at(6, 5).ell - field.at(4, 5).ell) / (2 * h);
  CHECK(dtau == doctest::Approx(-1.0).epsilon(1e-3));
  CHECK(drho * drho == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(2 * dtau + drho * drho == doctest::Approx(-1.0).epsilon(1e-3));

  const FormulaReport rep = verify_derivative_formulas(f, field);
  CHECK(rep.pass);
  // ell is quadratic in rho, so only the tau difference of 1/tau contributes.
  CHECK(rep.check("kh_free_identity").worst <= 2.5e-4);
  CHECK(rep.grad_dfrak_max == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep.grad_dfrak_min == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("derivative formulas on the shrinking sphere") {
  const FlowMetric f = sphere_ricci();
  ReducedFieldOptions fo;
  fo.multistart = false;
  const ReducedField field = reduced_field(f, make_axis(0.0, 0.99, 100), make_axis(0.5, 1.49, 100), fo);
  const FormulaReport rep = verify_derivative_formulas(f, field);
  CHECK(rep.pass);
  CHECK(rep.check("heat_bound_kd").worst >= -1e-4);
  CHECK(rep.check("kh_free_identity").worst <= 1e-3);
  CHECK(rep.check("grad_ell").worst <= 1e-3);
  CHECK(rep.grad_dfrak_max <= 3.0 + 1e-2);

  const ReducedField tiny = reduced_field(f, make_axis(0.1, 0.5, 4), make_axis(0.5, 1.0, 8), fo);
  CHECK_THROWS_AS(verify_derivative_formulas(f, tiny), DomainError);
}

TEST_CASE("remark convention changes only the Mueller-dependent checks") {
  const FlowMetric f = static_model(2, Curvature::Sphere);
  ReducedFieldOptions fo;
  fo.multistart = false;
  const ReducedField field = reduced_field(f, make_axis(0.0, 0.49, 50), make_axis(0.5, 0.99, 50), fo);
  FormulaOptions def, rem;
  rem.convention = MullerConvention::Remark;
  const FormulaReport a = verify_derivative_formulas(f, field, def);
  const FormulaReport b = verify_derivative_formulas(f, field, rem);
  CHECK(a.check("kh_free_identity").worst == b.check("kh_free_identity").worst);
  CHECK(a.check("grad_ell").worst == b.check("grad_ell").worst);
  CHECK(a.grad_dfrak_max == b.grad_dfrak_max);
}

TEST_CASE("property: D assembly identities on random samples") {
  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + trial % 3;
    const Curvature k = static_cast<Curvature>(trial % 3 - 1);
    const double K = (trial % 4 == 0) ? 0.0 : u(rng);
    ScaleFlowSpec spec{K == 0.0 ? ScaleVariant(scale::BackwardRicci{}) : ScaleVariant(scale::BackwardKRicci{K}), 1.0};
    const FlowMetric f = make_flow({n, k}, spec, {0.0, 0.1});
    const double tau = 0.1 * u(rng), v = 2.0 * u(rng);
    const QuantitySample q = muller_d(f, {u(rng), tau}, v);
    CHECK(q.D == doctest::Approx(q.D0 + 2.0 * q.R).epsilon(1e-14));
    CHECK(q.minus_laplace_H == 0.0);
    CHECK(q.four_div_h == 0.0);
    CHECK(q.minus_two_grad_H_V == 0.0);
    const double H = f.sample(tau).H;
    if (K == 0.0) {
      CHECK(std::abs(q.D) <= 1e-9);
    } else {
      CHECK(std::abs(q.D + 2.0 * K * (H + v * v)) <= 1e-8);
    }
  }
}

TEST_CASE("property: identity residual contracts under grid refinement") {
  const FlowMetric f = sphere_ricci();
  ReducedFieldOptions fo;
  fo.multistart = false;
  const auto coarse = verify_derivative_formulas(
      f, reduced_field(f, make_axis(0.0, 0.99, 100), make_axis(0.5, 1.49, 100), fo));
  const auto fine = verify_derivative_formulas(
      f, reduced_field(f, make_axis(0.0, 0.99, 199), make_axis(0.5, 1.49, 199), fo));
  CHECK(coarse.check("kh_free_identity").worst / fine.check("kh_free_identity").worst >= 3.0);
}

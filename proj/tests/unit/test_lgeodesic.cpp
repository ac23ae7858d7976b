#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "../oracles/frozen_oracles.hpp"
#include "rflab/error.hpp"
#include "rflab/lgeodesic.hpp"

using namespace rflab;

namespace {

FlowMetric flat_line() { return make_flow({1, Curvature::Flat}, {scale::Static{}, 1.0}, {0.0, 2.0}); }
FlowMetric sphere_ricci() {
  return make_flow({2, Curvature::Sphere}, {scale::BackwardRicci{}, 1.0}, {0.0, 2.0});
}

SampledCurve constant_curve(double rho, double tau_bar, std::size_t knots = 64) {
  SampledCurve c;
  for (std::size_t k = 1; k <= knots; ++k) {
    const double s = std::sqrt(tau_bar) * double(k) / knots;
    c.tau.push_back(s * s);
    c.rho.push_back(rho);
  }
  c.order = 1;
  return c;
}

}  // namespace

TEST_CASE("static line: straight curve to (2, 1) has L = 2") {
  const FlowMetric f = flat_line();
  CHECK(l_length(f, straight_curve({2.0, 1.0})) == doctest::Approx(2.0).epsilon(1e-10));
  const LGeodesic g = solve_minimal_l_geodesic(f, {2.0, 1.0});
  CHECK(g.l_length == doctest::Approx(2.0).epsilon(1e-10));
  const double ell = g.l_length / 2.0;
  CHECK(ell == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::sqrt(4.0 * ell) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("constant curve at the base point") {
  CHECK(l_length(flat_line(), constant_curve(0.0, 1.0)) == doctest::Approx(0.0));
  CHECK(l_length(sphere_ricci(), constant_curve(0.0, 1.0)) ==
        doctest::Approx(oracle::kShrinkJ1).epsilon(1e-9));
  const LGeodesic g = solve_minimal_l_geodesic(make_flow({2, Curvature::Flat}, {scale::Static{}, 1.0}, {0.0, 1.0}),
                                               {0.0, 0.7});
  CHECK(g.l_length == doctest::Approx(0.0));
  for (double r : g.curve.rho) CHECK(r == 0.0);
}

TEST_CASE("integrating the geodesic equation") {
  const LGeodesic zero = integrate_l_geodesic(flat_line(), 0.0, 1.0);
  CHECK(zero.l_length == doctest::Approx(0.0));
  CHECK(zero.rho_bar() == 0.0);

  // rho = 2 v_inf sqrt(tau) on the static line, so v_inf = 1 reaches (2, 1).
  const LGeodesic line = integrate_l_geodesic(flat_line(), 1.0, 1.0);
  CHECK(line.rho_bar() == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(line.l_length == doctest::Approx(2.0).epsilon(1e-9));
  for (std::size_t k = 0; k < line.curve.tau.size(); ++k) {
    CHECK(line.curve.rho[k] == doctest::Approx(2.0 * std::sqrt(line.curve.tau[k])).epsilon(1e-9));
  }

  for (double v : {0.1, 0.4, 0.9}) {
    const LGeodesic g = integrate_l_geodesic(sphere_ricci(), v, 1.0);
    CHECK(g.first_integral_drift <= 1e-6);
  }
}

TEST_CASE("shrinking sphere minimal geodesic against the quadrature oracle") {
  const FlowMetric f = sphere_ricci();
  const RadialIntegrals ri = radial_integrals(f, 1.0);
  CHECK(ri.I == doctest::Approx(oracle::kShrinkI1).epsilon(1e-10));
  CHECK(ri.J == doctest::Approx(oracle::kShrinkJ1).epsilon(1e-10));

  const SpaceTimePoint target{std::numbers::pi / 4, 1.0};
  const LGeodesic fi = solve_minimal_l_geodesic(f, target);
  CHECK(fi.l_length == doctest::Approx(oracle::kShrinkLPiOver4).epsilon(1e-10));
  CHECK(std::abs(fi.rho_bar() - target.rho) <= 1e-8);
  CHECK(fi.first_integral_drift <= 1e-6);

  const ShootingResult sh = shoot_minimal_l_geodesic(f, target);
  CHECK(sh.geodesic.l_length == doctest::Approx(oracle::kShrinkLPiOver4).epsilon(1e-8));
  CHECK(sh.smooth);

  const LGeodesic var = variational_refine(f, straight_curve(target, 256));
  CHECK(std::abs(var.l_length - oracle::kShrinkLPiOver4) / oracle::kShrinkLPiOver4 <= 1e-4);
}

TEST_CASE("variational refinement") {
  const FlowMetric f = flat_line();
  const SampledCurve straight = straight_curve({2.0, 1.0}, 64);
  const LGeodesic same = variational_refine(f, straight);
  CHECK(same.l_length <= discrete_l_length(f, straight) + 1e-12);
  CHECK(same.l_length == doctest::Approx(2.0).epsilon(1e-9));

  SampledCurve zig = straight;
  for (std::size_t k = 0; k + 1 < zig.rho.size(); ++k) zig.rho[k] += (k % 2 ? 0.3 : -0.3);
  const double before = discrete_l_length(f, zig);
  const LGeodesic fixed = variational_refine(f, zig);
  CHECK(before > 2.5);
  CHECK(fixed.l_length < before);
  CHECK(fixed.l_length == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(solve_minimal_l_geodesic(sphere_ricci(), {0.5, 0.0}), DomainError);
  CHECK_THROWS_AS(solve_minimal_l_geodesic(sphere_ricci(), {3.1, 1.0}), DomainError);
  SampledCurve bad = straight_curve({1.0, 1.0}, 32);
  std::swap(bad.tau[3], bad.tau[4]);
  CHECK_THROWS_AS(l_length(sphere_ricci(), bad), DomainError);
}

TEST_CASE("reduced field on the static plane is d^2 / 4 tau") {
  const FlowMetric f = make_flow({2, Curvature::Flat}, {scale::Static{}, 1.0}, {0.0, 1.0});
  const ReducedField field = reduced_field(f, make_axis(0.0, 3.0, 31), make_axis(0.01, 1.0, 21));
  for (const auto& n : field.nodes) {
    const double exact = n.rho * n.rho / (4.0 * n.tau);
    CHECK(std::abs(n.ell - exact) <= 1e-8 * std::max(1.0, exact));
    CHECK(n.smooth);
  }
  // Near tau = 0 the reduced radius is the distance itself.
  for (int i = 0; i < 31; ++i) CHECK(field.at(i, 0).dfrak == doctest::Approx(field.rho.at(i)).epsilon(1e-10));
}

TEST_CASE("reduced field node at the pole") {
  const FlowMetric f = sphere_ricci();
  const ReducedField field = reduced_field(f, make_axis(0.0, 1.0, 5), make_axis(0.5, 1.0, 3));
  CHECK(field.at(0, 2).ell == doctest::Approx(oracle::kShrinkEllPole).epsilon(1e-10));
}

TEST_CASE("property: reduced field invariants on random homogeneous flows") {
  std::mt19937 rng(314159);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 2 + trial % 3;
    const Curvature k = trial % 2 ? Curvature::Sphere : Curvature::Flat;
    const double a0 = 0.7 + 0.6 * u(rng);
    ScaleFlowSpec spec{trial % 3 == 0 ? ScaleVariant(scale::BackwardKRicci{u(rng)})
                                      : ScaleVariant(scale::BackwardRicci{}),
                       a0};
    const FlowMetric f = make_flow({n, k}, spec, {0.0, 1.5});
    ReducedFieldOptions opt;
    opt.shooting.seed = trial;
    const ReducedField field = reduced_field(f, make_axis(0.0, 2.5, 11), make_axis(0.2, 1.5, 7), opt);
    for (int j = 0; j < 7; ++j) {
      for (int i = 0; i < 11; ++i) {
        const ReducedNode& nd = field.at(i, j);
        CHECK(nd.status == "ok");
        CHECK(nd.dfrak * nd.dfrak == doctest::Approx(4.0 * nd.tau * nd.ell).epsilon(1e-12));
        CHECK(nd.ell == doctest::Approx(nd.L / (2.0 * std::sqrt(nd.tau))).epsilon(1e-14));
        CHECK(nd.ell >= 0.0);  // H >= 0 on these flows
        CHECK(nd.shooting_gap <= 1e-6);
        if (i > 0) CHECK(nd.ell >= field.at(i - 1, j).ell);
      }
    }
  }
}

TEST_CASE("property: first integral is conserved along random shots") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> v(0.0, 0.8), tb(0.1, 1.5);
  const FlowMetric f = sphere_ricci();
  for (int k = 0; k < 30; ++k) {
    const LGeodesic g = integrate_l_geodesic(f, v(rng), tb(rng));
    CHECK(g.first_integral_drift <= 1e-6);
  }
}

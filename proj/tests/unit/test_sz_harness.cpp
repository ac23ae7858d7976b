#include <doctest.h>

#include <cmath>
#include <random>

#include "../oracles/frozen_oracles.hpp"
#include "rflab/error.hpp"
#include "rflab/sz_harness.hpp"

using namespace rflab;

TEST_CASE("smooth step") {
  CHECK(smooth_step(-1.0).value == 1.0);
  CHECK(smooth_step(0.0).value == 1.0);
  CHECK(smooth_step(0.5).value == doctest::Approx(0.5));
  CHECK(smooth_step(1.0).value == 0.0);
  CHECK(smooth_step(2.0).d1 == 0.0);
  // Derivatives against central differences.
  for (double x : {0.2, 0.5, 0.8}) {
    const double h = 1e-5;
    CHECK(smooth_step(x).d1 == doctest::Approx((smooth_step(x + h).value - smooth_step(x - h).value) / (2 * h)).epsilon(1e-7));
    CHECK(smooth_step(x).d2 == doctest::Approx((smooth_step(x + h).d1 - smooth_step(x - h).d1) / (2 * h)).epsilon(1e-6));
    CHECK(step_d1_quotient(x, 0.75) ==
          doctest::Approx(std::abs(smooth_step(x).d1) / std::pow(smooth_step(x).value, 0.75)).epsilon(1e-12));
  }
  // Far in the tail S underflows but the quotient stays finite.
  CHECK(smooth_step(0.9995).value == 0.0);
  CHECK(std::isfinite(step_d1_quotient(0.9995, 0.75)));
}

TEST_CASE("cutoff constants match the high-precision oracle") {
  const Cutoff c(1.0, 1.0);
  const double ca = std::max(2.0 * oracle::kStepSupD1Q34, 4.0 * oracle::kStepSupD2Q34);
  CHECK(c.C_alpha() == doctest::Approx(ca).epsilon(1e-9));
  CHECK(c.C_alpha() >= ca);
  CHECK(c.C_alpha() == doctest::Approx(5548.128).epsilon(1e-6));
  CHECK(c.C() == doctest::Approx(4.0 * oracle::kStepSupD1Q12).epsilon(1e-9));
  CHECK(c.C() == doctest::Approx(16.959).epsilon(1e-4));
  // The constants do not depend on R and T.
  const Cutoff d(3.0, 7.0);
  CHECK(d.C_alpha() == c.C_alpha());
  CHECK(d.C() == c.C());
  CHECK_THROWS_AS(Cutoff(0.0, 1.0), DomainError);
}

TEST_CASE("cutoff plateau, support and scaling") {
  Cutoff c(2.0, 4.0);
  CHECK(c.psi(0.0, 0.0) == 1.0);
  CHECK(c.psi(1.0, 1.0) == 1.0);
  CHECK(c.psi(2.0, 0.5) == 0.0);
  CHECK(c.psi(0.5, 2.0) == 0.0);
  CHECK(c.d_r(0.9, 0.5) == 0.0);
  c.certify(512);
  const CutoffCertification& cert = c.certification();
  CHECK(cert.plateau_ok);
  CHECK(cert.support_ok);
  CHECK(cert.monotone_ok);
  CHECK(cert.pass);
  CHECK(cert.max_dr_quotient <= c.C_alpha());
  CHECK(cert.max_drr_quotient <= c.C_alpha());
  CHECK(cert.max_dtau_quotient <= c.C());

  const Cutoff big(4.0, 4.0);
  CHECK(big.sup_abs_dr() == doctest::Approx(0.5 * c.sup_abs_dr()).epsilon(1e-14));
}

TEST_CASE("property: cutoff derivatives on random points") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const double R = 0.5 + 4.0 * u(rng), T = 0.5 + 4.0 * u(rng);
    const Cutoff c(R, T);
    const double r = R * u(rng), tau = 0.5 * T * u(rng);
    const double psi = c.psi(r, tau);
    CHECK(psi >= 0.0);
    CHECK(psi <= 1.0);
    CHECK(c.d_r(r, tau) <= 0.0);
    if (psi > 1e-300) {
      CHECK(R * std::abs(c.d_r(r, tau)) <= c.C_alpha() * std::pow(psi, Cutoff::alpha));
      CHECK(R * R * std::abs(c.d_rr(r, tau)) <= c.C_alpha() * std::pow(psi, Cutoff::alpha));
      CHECK(T * std::abs(c.d_tau(r, tau)) <= c.C() * std::sqrt(psi));
    }
  }
}

TEST_CASE("estimate constants") {
  const EstimateConstants unit = estimate_constants(2, 1.0, 1.0);
  CHECK(unit.Cbar_exact == Rational(3171, 8));
  CHECK(unit.Cbar == 396.375);
  CHECK(unit.Ctilde1 == 6.0);
  CHECK(unit.Ctilde2 == 30.0);
  CHECK(unit.c == 396.375);
  CHECK(unit.C_n == doctest::Approx(std::pow(396.375, 0.25)));

  // C_n grows with n and with the cutoff constants.
  double last = 0.0;
  for (int n = 1; n <= 6; ++n) {
    const double cn = estimate_constants(n, 2.0, 3.0).C_n;
    CHECK(cn > last);
    last = cn;
  }
  CHECK(estimate_constants(2, 2.0, 1.0).C_n > unit.C_n);
  CHECK(estimate_constants(2, 1.0, 100.0).c == doctest::Approx(6.0e4));
  CHECK_THROWS_AS(estimate_constants(0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(estimate_constants(2, -1.0, 1.0), DomainError);

  // Exact rationals round-trip doubles.
  for (double x : {0.1, 1.0 / 3.0, 5548.128, 1e-300}) CHECK(exact_rational(x).convert_to<double>() == x);
}

namespace {

struct LineCase {
  FlowMetric flow = make_flow({1, Curvature::Flat}, {scale::Static{}, 1.0}, {0.0, 64.0});
  Axis rho = make_axis(-9.0, 9.0, 73);
  Axis tau = make_axis(0.25, 64.0, 64);
  ReducedField field;
  LineCase() {
    ReducedFieldOptions fo;
    fo.multistart = false;
    field = reduced_field(flow, rho, tau, fo);
  }
};

}  // namespace

TEST_CASE("gradient estimate on the static line") {
  const LineCase lc;
  const EstimateConstants c = estimate_constants(1, Cutoff(1.0, 1.0));

  const HeatSolution cst = exact_solution(lc.flow, heat::Constant{2.0}, lc.rho, lc.tau);
  const EstimateReport ok = gradient_estimate_check(lc.flow, cst, lc.field, 4.0, 4.0, 0.0, 2.0, c);
  CHECK(ok.status == "pass");
  CHECK(ok.scale_factor == doctest::Approx(0.75));
  CHECK(ok.nodes_in_region > 0);
  CHECK(ok.margin == doctest::Approx(1.0));

  const HeatSolution ex = exact_solution(lc.flow, heat::ExpLine{1e-4}, lc.rho, lc.tau);
  const EstimateReport e = gradient_estimate_check(lc.flow, ex, lc.field, 4.0, 4.0, 0.0, ex.A, c);
  CHECK(e.status == "pass");
  CHECK(e.worst.ratio <= 1.0);

  const HeatSolution lin = exact_solution(lc.flow, heat::LinearLine{1.0, 0.0}, lc.rho, lc.tau);
  const EstimateReport bad = gradient_estimate_check(lc.flow, lin, lc.field, 4.0, 4.0, 0.0, 9.0, c);
  CHECK(bad.status == "inapplicable");
  CHECK_FALSE(bad.reasons.empty());

  CHECK_THROWS_AS(gradient_estimate_check(lc.flow, cst, lc.field, 0.0, 4.0, 0.0, 2.0, c), DomainError);
}

TEST_CASE("Liouville sweep separates constants from growth") {
  const LineCase lc;
  const EstimateConstants c = estimate_constants(1, Cutoff(1.0, 1.0));
  const std::vector<double> radii = {2.0, 4.0, 8.0};

  const HeatSolution cst = exact_solution(lc.flow, heat::Constant{1.0}, lc.rho, lc.tau);
  const LiouvilleReport a = liouville_sweep(lc.flow, cst, lc.field, radii, {0.5, 1.0}, c);
  CHECK(a.mode == "positive");
  CHECK(a.classification == "consistent-with-constant");
  CHECK(a.loglog_slope == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(a.strictly_decreasing);
  CHECK(a.probe_dfrak == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(a.probe_grad_u == doctest::Approx(0.0));

  const HeatSolution lin = exact_solution(lc.flow, heat::LinearLine{1.0, 0.0}, lc.rho, lc.tau);
  const LiouvilleReport b = liouville_sweep(lc.flow, lin, lc.field, radii, {0.5, 1.0}, c);
  CHECK(b.mode == "signed");
  CHECK(b.classification == "growth-condition-violated");
  CHECK(b.probe_grad_u == doctest::Approx(1.0).epsilon(1e-9));

  CHECK_THROWS_AS(liouville_sweep(lc.flow, cst, lc.field, {4.0}, {0.5, 1.0}, c), DomainError);
  CHECK_THROWS_AS(liouville_sweep(lc.flow, cst, lc.field, {0.5, 4.0}, {0.5, 1.0}, c), DomainError);
}

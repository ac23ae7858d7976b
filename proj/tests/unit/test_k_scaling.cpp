#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "../oracles/frozen_oracles.hpp"
#include "rflab/error.hpp"
#include "rflab/k_scaling.hpp"

using namespace rflab;

TEST_CASE("sigma and its inverse") {
  CHECK(sigma_eval(0.0, 0.7) == 0.7);
  CHECK(sigma_inv(0.0, -0.3) == -0.3);
  CHECK(sigma_derivative(0.0, 5.0) == 1.0);
  CHECK(sigma_inv(0.5, 1.0) == doctest::Approx(oracle::kSigmaInvHalfAtOne).epsilon(1e-15));
  CHECK(sigma_eval(0.5, oracle::kSigmaInvHalfAtOne) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sigma_derivative(0.25, 1.0) == doctest::Approx(2.0));
  // J = {s < 1/(2K)} for K > 0.
  CHECK_THROWS_AS(sigma_eval(0.5, 1.0), DomainError);
  CHECK_NOTHROW(sigma_eval(-0.5, 10.0));

  for (double K : {0.0, 0.3, 1.0, -0.4}) {
    const SigmaCheck c = sigma_pair_check(K, 2000, 5);
    CHECK(c.samples == 2000);
    CHECK(c.max_inverse_error <= 1e-12);
    CHECK(c.max_derivative_error <= 1e-12);
    CHECK(c.max_fd_derivative_error <= 1e-12);
  }
}

TEST_CASE("property: sigma maps J monotonically onto the line") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> uk(-1.5, 1.5), ut(-3.0, 3.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double K = uk(rng), t1 = ut(rng), t2 = ut(rng);
    const double s1 = sigma_inv(K, t1), s2 = sigma_inv(K, t2);
    if (K > 0.0) {
      CHECK(1.0 - 2.0 * K * s1 > 0.0);
    }
    CHECK((t1 < t2) == (s1 < s2));
    CHECK(sigma_eval(K, s1) == doctest::Approx(t1).epsilon(1e-12).scale(1.0));
    CHECK(sigma_derivative(K, s1) == doctest::Approx(std::exp(2.0 * K * t1)).epsilon(1e-12));
  }
}

TEST_CASE("forward K-Ricci flows") {
  const ForwardFlow f = make_forward_k_ricci(2, Curvature::Sphere, 0.3, 1.0, 0.0, 0.5);
  for (double t : {0.0, 0.2, 0.5}) CHECK(std::abs(f.k_ricci_residual(0.3, t)) <= 1e-12);
  CHECK(std::abs(f.k_ricci_residual(0.0, 0.2)) > 1e-3);
  CHECK(f.scalar(0.2) == doctest::Approx(2.0 * f.ric_unit(0.2)));
  const double h = 1e-5;
  CHECK(f.d_scalar(0.2) == doctest::Approx((f.scalar(0.2 + h) - f.scalar(0.2 - h)) / (2 * h)).epsilon(1e-8));

  CHECK(k_ricci_extinction_time(2, Curvature::Sphere, 0.3, 1.0) ==
        doctest::Approx(oracle::kExtinctionK03).epsilon(1e-13));
  CHECK(k_ricci_extinction_time(3, Curvature::Sphere, 0.0, 1.0) == doctest::Approx(0.25));
  CHECK(k_ricci_extinction_time(2, Curvature::Flat, 0.3, 1.0) == std::numeric_limits<double>::infinity());
  // Balanced sphere: a^2 = (n-1)/K is stationary.
  CHECK(k_ricci_extinction_time(2, Curvature::Sphere, 0.5, std::sqrt(2.0)) ==
        std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(make_forward_k_ricci(2, Curvature::Sphere, 0.3, 1.0, 0.0, 0.7), DomainError);
}

TEST_CASE("transform to a Ricci flow") {
  for (double K : {0.0, 0.3, 1.0}) {
    const double T = std::min(1.0, 0.9 * k_ricci_extinction_time(3, Curvature::Sphere, K, 1.5));
    const ForwardFlow f = make_forward_k_ricci(3, Curvature::Sphere, K, 1.5, 0.0, T);
    const TransformedFlow g = transform_to_ricci_flow(f, K);
    CHECK(g.s_lo() == doctest::Approx(0.0));
    CHECK(g.s_hi() == doctest::Approx(sigma_inv(K, T)));
    const TransformReport r = check_transform(g);
    CHECK(r.pass);
    CHECK(r.source_residual <= 1e-10);
    CHECK(r.ricci_residual_exact <= 1e-10);
    CHECK(r.ricci_residual_fd <= 1e-8);
    CHECK(r.round_trip_error <= 1e-12);
    CHECK(r.initial_mismatch <= 1e-14);
  }
  const ForwardFlow wrong = make_forward_k_ricci(2, Curvature::Sphere, 0.3, 1.0, 0.0, 0.5);
  CHECK_THROWS_AS(transform_to_ricci_flow(wrong, 0.6), DomainError);
}

TEST_CASE("balanced sphere transforms to the shrinking sphere") {
  const double K = 0.5;
  const int n = 3;
  const double a0 = std::sqrt((n - 1) / K);
  const ForwardFlow f = make_forward_k_ricci(n, Curvature::Sphere, K, a0, 0.0, 3.0);
  CHECK(f.scale(2.0).a == doctest::Approx(a0).epsilon(1e-14));
  const TransformedFlow g = transform_to_ricci_flow(f, K);
  for (double s : {0.0, 0.3, 0.6, g.s_hi()}) {
    const double expect = std::sqrt(a0 * a0 - 2.0 * (n - 1) * s);
    CHECK(g.scale(s).a == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("tabulated forward flows") {
  std::vector<double> t, a;
  for (int k = 0; k <= 40; ++k) {
    t.push_back(0.01 * k);
    a.push_back(std::sqrt(1.0 - 2.0 * 0.01 * k));
  }
  const ForwardFlow f = make_forward_tabulated(2, Curvature::Sphere, t, a);
  CHECK(std::abs(f.k_ricci_residual(0.0, 0.2)) <= 1e-6);
  CHECK(f.t_hi() == doctest::Approx(0.4));
  CHECK_THROWS_AS(make_forward_tabulated(2, Curvature::Sphere, {0.0, 0.1}, {1.0, 0.9}), DomainError);
}

TEST_CASE("finite-time Harnack quantity") {
  const ForwardFlow f = make_forward_k_ricci(2, Curvature::Sphere, 0.0, 1.0, 0.0, 0.45);
  const HarnackReport r = k_trace_harnack_check(f, 0.0, {0.25}, {0.0, 1.0});
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].lhs == doctest::Approx(32.0).epsilon(1e-12));
  CHECK(r.rows[1].lhs == doctest::Approx(36.0).epsilon(1e-12));
  CHECK(r.status == "pass");
  CHECK(r.variant == "finite-time");
  CHECK(r.min_lhs == doctest::Approx(32.0).epsilon(1e-12));

  // K -> 0 limit of the coefficient.
  const ForwardFlow fk = make_forward_k_ricci(2, Curvature::Sphere, 1e-9, 1.0, 0.0, 0.45);
  const HarnackReport rk = k_trace_harnack_check(fk, 1e-9, {0.25}, {0.0});
  CHECK(rk.rows[0].lhs == doctest::Approx(32.0).epsilon(1e-6));

  const ForwardFlow hyp = make_forward_k_ricci(2, Curvature::Hyperbolic, 0.3, 1.0, 0.0, 1.0);
  CHECK(k_trace_harnack_check(hyp, 0.3, {0.5}, {0.0}).status == "skipped");
  CHECK_THROWS_AS(k_trace_harnack_check(f, 0.0, {0.0}, {0.0}), DomainError);
}

TEST_CASE("ancient Harnack quantity") {
  for (double K : {-0.5, 0.0, 0.3, 1.0}) {
    const ForwardFlow f = make_forward_k_ricci(2, Curvature::Sphere, K, 1.0, -3.0, 0.0);
    const HarnackReport r = k_ancient_harnack_check(f, K, {-3.0, -1.5, -0.5, 0.0}, {0.0, 0.5, 1.0, 2.0});
    CHECK(r.variant == "ancient");
    CHECK(r.status == "pass");
    CHECK(r.samples == 16);
    CHECK(r.min_lhs >= 0.0);
  }
}

TEST_CASE("property: backward K-Ricci flows satisfy the trace and D identities") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 3;
    const Curvature k = static_cast<Curvature>(trial % 3 - 1);
    const double K = trial % 5 == 0 ? 0.0 : 1.5 * u(rng);
    const double a0 = 0.5 + u(rng);
    ScaleFlowSpec spec{K == 0.0 ? ScaleVariant(scale::BackwardRicci{}) : ScaleVariant(scale::BackwardKRicci{K}), a0};
    const FlowMetric f = make_flow({n, k}, spec, {0.0, 0.05 * a0 * a0});
    const KfrdvReport r = kfrdv_check(f, {0.0, 0.5, 1.0, 2.0}, 21);
    CHECK(r.pass);
    CHECK(r.trace_residual <= 1e-10);
    CHECK(r.d_identity_residual <= 1e-9);
    CHECK(r.evolution_residual <= r.tolerance);
  }
  const FlowMetric st = make_flow({2, Curvature::Sphere}, {scale::Static{}, 1.0}, {0.0, 1.0});
  CHECK_THROWS_AS(kfrdv_check(st, {0.0}), DomainError);
}

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rflab/cubic_spline.hpp"
#include "rflab/error.hpp"
#include "rflab/grid.hpp"
#include "rflab/model_flows.hpp"

using namespace rflab;
using std::numbers::pi;

namespace {

FlowMetric sphere_ricci(int n = 2, double hi = 2.0) {
  return make_flow({n, Curvature::Sphere}, {scale::BackwardRicci{}, 1.0}, {0.0, hi});
}

}  // namespace

TEST_CASE("shrinking sphere has a^2 = 1 + 2 tau") {
  const FlowMetric f = sphere_ricci();
  for (double tau : {0.0, 0.25, 1.0, 1.7}) {
    const MetricSample m = f.sample(tau);
    CHECK(m.a * m.a == doctest::Approx(1.0 + 2.0 * tau).epsilon(1e-14));
    CHECK(m.a * m.da == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(f.sample(1.0).H == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("static flat flow has no h") {
  const FlowMetric f = make_flow({3, Curvature::Flat}, {scale::Static{}, 1.0}, {0.0, 5.0});
  for (double tau : {0.0, 1.0, 5.0}) {
    const MetricSample m = f.sample(tau);
    CHECK(m.H == 0.0);
    CHECK(m.h_norm2 == 0.0);
    CHECK(m.dH == 0.0);
  }
}

TEST_CASE("K-Ricci with K = 0 reproduces the Ricci flow samples") {
  const FlowMetric a = sphere_ricci();
  const FlowMetric b = make_flow({2, Curvature::Sphere}, {scale::BackwardKRicci{0.0}, 1.0}, {0.0, 2.0});
  for (double tau : {0.0, 0.3, 1.1, 2.0}) {
    const MetricSample x = a.sample(tau), y = b.sample(tau);
    CHECK(x.a == y.a);
    CHECK(x.da == y.da);
    CHECK(x.dda == y.dda);
    CHECK(x.H == y.H);
  }
}

TEST_CASE("K-Ricci h at tau = 0") {
  const FlowMetric f = make_flow({2, Curvature::Sphere}, {scale::BackwardKRicci{0.5}, 1.0}, {0.0, 1.0});
  CHECK(f.sample(0.0).h_unit == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("make_flow rejects invalid specs") {
  CHECK_THROWS_AS(make_flow({1, Curvature::Sphere}, {scale::Static{}, 1.0}, {0.0, 1.0}), DomainError);
  CHECK_THROWS_AS(make_flow({0, Curvature::Flat}, {scale::Static{}, 1.0}, {0.0, 1.0}), DomainError);
  CHECK_THROWS_AS(make_flow({2, Curvature::Flat}, {scale::Static{}, -1.0}, {0.0, 1.0}), DomainError);
  CHECK_THROWS_AS(make_flow({2, Curvature::Sphere}, {scale::BackwardKRicci{-0.1}, 1.0}, {0.0, 1.0}),
                  DomainError);
  // Hyperbolic Ricci flow with n = 2 goes extinct at tau = 1/2.
  CHECK_THROWS_AS(make_flow({2, Curvature::Hyperbolic}, {scale::BackwardRicci{}, 1.0}, {0.0, 0.5}),
                  DomainError);
  CHECK_NOTHROW(make_flow({2, Curvature::Hyperbolic}, {scale::BackwardRicci{}, 1.0}, {0.0, 0.49}));
  CHECK_THROWS_AS(sphere_ricci().sample(2.5), DomainError);
}

TEST_CASE("sphere chart stops short of the cut locus") {
  const FlowMetric f = sphere_ricci();
  CHECK(f.rho_max() == doctest::Approx(pi - kSphereCutMargin));
  CHECK(f.in_chart(3.0));
  CHECK_FALSE(f.in_chart(3.05));
  const FlowMetric line = make_flow({1, Curvature::Flat}, {scale::Static{}, 1.0}, {0.0, 1.0});
  CHECK(line.in_chart(-1e6));
}

TEST_CASE("radial Laplace-Beltrami examples") {
  const FlowMetric r3 = make_flow({3, Curvature::Flat}, {scale::Static{}, 1.0}, {0.0, 1.0});
  CHECK(laplace_beltrami_radial(r3, 0.5, 1.0, 2.0, 2.0) == doctest::Approx(6.0));
  CHECK(laplace_beltrami_radial(r3, 0.5, 0.0, 0.0, 2.0) == doctest::Approx(6.0));

  const FlowMetric s2 = make_flow({2, Curvature::Sphere}, {scale::Static{}, 1.0}, {0.0, 1.0});
  const double r = pi / 3;
  CHECK(laplace_beltrami_radial(s2, 0.5, r, -std::sin(r), -std::cos(r)) == doctest::Approx(-1.0));

  const FlowMetric shrink = sphere_ricci();
  auto cosine = [](double x) { return std::cos(x); };
  CHECK(laplace_beltrami_radial(shrink, cosine, 1.0, r) == doctest::Approx(-1.0 / 3.0).epsilon(1e-10));
  // Odd data at the pole has no even extension.
  CHECK_THROWS_AS(laplace_beltrami_radial(shrink, 1.0, 0.0, 0.3, 0.0), DomainError);
}

TEST_CASE("classification of the model flows") {
  const ClassificationReport ricci = classify_flow(sphere_ricci(), 0.0);
  CHECK(ricci.super_ricci);
  CHECK(ricci.super_ricci_equality);
  CHECK(ricci.h_nonnegative);

  const FlowMetric stat = make_flow({2, Curvature::Sphere}, {scale::Static{}, 1.0}, {0.0, 1.0});
  const ClassificationReport s = classify_flow(stat, 0.0);
  CHECK(s.super_ricci);
  for (const auto& adm : s.admissibility) CHECK(adm.c_tau == 0.0);

  const FlowMetric kr = make_flow({2, Curvature::Sphere}, {scale::BackwardKRicci{0.5}, 1.0}, {0.0, 1.0});
  const ClassificationReport k = classify_flow(kr, 0.5);
  CHECK(k.minus_k_super_ricci);
  CHECK(k.minus_k_equality);
  CHECK_FALSE(k.super_ricci);
}

TEST_CASE("property: sample identities on random flows and times") {
  std::mt19937 rng(20261016);
  std::uniform_int_distribution<int> dim(2, 5), kap(-1, 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = dim(rng);
    const auto k = static_cast<Curvature>(kap(rng));
    const double a0 = 0.5 + unit(rng);
    const double K = unit(rng);
    ScaleFlowSpec spec{trial % 2 ? ScaleVariant(scale::BackwardRicci{}) : ScaleVariant(scale::BackwardKRicci{K}), a0};
    // Keep hyperbolic flows short of extinction.
    const double hi = 0.2 * a0 * a0 / (2.0 * (n - 1));
    const FlowMetric f = make_flow({n, k}, spec, {0.0, hi});
    const double tau = hi * unit(rng);
    const MetricSample m = f.sample(tau);
    CHECK(std::abs(m.H - n * m.h_unit) <= 1e-10 * std::max(1.0, std::abs(m.H)));
    CHECK(std::abs(m.h_norm2 - m.H * m.H / n) <= 1e-10 * std::max(1.0, m.h_norm2));
    CHECK(m.grad_h_radial == 0.0);
    if (trial % 2) {
      CHECK(std::abs(m.ric_unit - m.h_unit) <= 1e-10 * std::max(1.0, std::abs(m.ric_unit)));
    } else {
      CHECK(std::abs(m.h_unit - m.ric_unit - K) <= 1e-10 * std::max(1.0, std::abs(m.h_unit)));
    }
    // Laplacian of a constant vanishes everywhere in the chart.
    const double rho = f.rho_max() > 10 ? 5.0 * unit(rng) : f.rho_max() * unit(rng);
    CHECK(laplace_beltrami_radial(f, tau, rho, 0.0, 0.0) == 0.0);
  }
}

TEST_CASE("property: tabulated profile matches the closed form") {
  const FlowMetric exact = sphere_ricci(3, 1.0);
  scale::Tabulated tab;
  for (int i = 0; i <= 400; ++i) {
    const double tau = i / 400.0;
    tab.tau.push_back(tau);
    tab.a.push_back(std::sqrt(1.0 + 4.0 * tau));
  }
  const FlowMetric f = make_flow({3, Curvature::Sphere}, {tab, 1.0}, {0.0, 1.0});
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int k = 0; k < 100; ++k) {
    const double tau = u(rng);
    const MetricSample a = f.sample(tau), b = exact.sample(tau);
    CHECK(std::abs(a.a - b.a) <= 1e-6);
    CHECK(std::abs(a.H - b.H) <= 1e-6);
    CHECK(std::abs(a.dH - b.dH) <= 1e-6 * std::max(1.0, std::abs(b.dH)) * 10);
    CHECK(std::abs(a.ric_unit - b.ric_unit) <= 1e-6);
  }
}

TEST_CASE("spline needs five knots and interpolates cubics exactly") {
  const std::vector<double> x4 = {0, 1, 2, 3};
  CHECK_THROWS(CubicSpline(x4, x4));
  std::vector<double> x, y;
  for (int i = 0; i < 9; ++i) {
    x.push_back(0.3 * i);
    y.push_back(std::pow(0.3 * i, 3) - 2 * 0.3 * i);
  }
  const CubicSpline s(x, y);
  for (double t : {0.1, 0.77, 1.9, 2.35}) {
    const SplineValue v = s.evaluate(t);
    CHECK(v.value == doctest::Approx(t * t * t - 2 * t).epsilon(1e-12));
    CHECK(v.first == doctest::Approx(3 * t * t - 2).epsilon(1e-11));
    CHECK(v.second == doctest::Approx(6 * t).epsilon(1e-10));
  }
}

TEST_CASE("grid differences are second order with an error estimate") {
  Field2D f(make_axis(0.0, 1.0, 41), make_axis(0.0, 1.0, 3));
  for (int i = 0; i < 41; ++i) {
    for (int j = 0; j < 3; ++j) f(i, j) = std::cos(f.rho.at(i));
  }
  const LineSamples line = rho_line(f, 1, true);
  const Derivative d0 = diff1(line, 0);
  CHECK(d0.value == 0.0);
  const Derivative d2 = diff2(line, 0);
  CHECK(d2.value == doctest::Approx(-1.0).epsilon(1e-3));
  const Derivative mid = diff1(line, 20);
  CHECK(std::abs(mid.value + std::sin(0.5)) < 1e-3);
  CHECK(std::isfinite(mid.error));
  CHECK(std::abs(mid.value + std::sin(0.5)) <= 2.0 * mid.error);
}

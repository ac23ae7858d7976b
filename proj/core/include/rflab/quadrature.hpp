#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

#include "rflab/error.hpp"

namespace rflab {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;        // sum of |Kronrod - Gauss| over the final partition
  std::size_t evaluations = 0;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gauss_kronrod_15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.
// Stops when the summed error estimate is below max(abs_tol, rel_tol*|I|).
// Integrands with integrable endpoint singularities should be regularized by
// the caller (e.g. s = sqrt(tau)) before they get here.
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double abs_tol,
                                    double rel_tol = 0.0,
                                    std::size_t max_panels = 2000) {
  QuadratureResult out;
  if (a == b) return out;
  std::priority_queue<detail::Panel> panels;
  panels.push(detail::gauss_kronrod_15(f, a, b));
  out.evaluations = 15;
  double value = panels.top().value;
  double error = panels.top().error;
  while (error > std::max(abs_tol, rel_tol * std::abs(value))) {
    if (panels.size() >= max_panels) {
      throw NumericalError("integrate_adaptive: panel budget exhausted");
    }
    const detail::Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const auto left = detail::gauss_kronrod_15(f, worst.a, mid);
    const auto right = detail::gauss_kronrod_15(f, mid, worst.b);
    out.evaluations += 30;
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
    if (!std::isfinite(value)) {
      throw NumericalError("integrate_adaptive: non-finite integrand");
    }
  }
  // Re-sum from the panels to shed the drift of the running updates.
  value = 0.0;
  error = 0.0;
  std::vector<detail::Panel> all;
  all.reserve(panels.size());
  while (!panels.empty()) {
    all.push_back(panels.top());
    panels.pop();
  }
  std::sort(all.begin(), all.end(),
            [](const detail::Panel& l, const detail::Panel& r) { return l.a < r.a; });
  for (const auto& p : all) {
    value += p.value;
    error += p.error;
  }
  out.value = value;
  out.error = error;
  return out;
}

// Fixed 5-point Gauss-Legendre rule, used for cell volumes and segment weights
// where the integrand is a low-degree smooth function of a short interval.
template <class F>
double gauss_legendre_5(F&& f, double a, double b) {
  static constexpr std::array<double, 5> x = {
      0.0, 0.538469310105683091036314420700208, 0.906179845938663992797626878299392,
      -0.538469310105683091036314420700208, -0.906179845938663992797626878299392};
  static constexpr std::array<double, 5> w = {
      0.568888888888888888888888888888889, 0.478628670499366468041291514835638,
      0.236926885056189087514264040719917, 0.478628670499366468041291514835638,
      0.236926885056189087514264040719917};
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < 5; ++i) sum += w[i] * f(c + h * x[i]);
  return sum * h;
}

}  // namespace rflab

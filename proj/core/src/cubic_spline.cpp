#include "rflab/cubic_spline.hpp"

#include <algorithm>

#include "rflab/error.hpp"

namespace rflab {

CubicSpline::CubicSpline(std::span<const double> x, std::span<const double> y)
    : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
  const std::size_t n = x_.size();
  if (n != y_.size()) throw DomainError("CubicSpline: size mismatch");
  if (n < 5) throw DomainError("CubicSpline: need at least 5 knots");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(x_[i] > x_[i - 1])) throw DomainError("CubicSpline: knots must increase strictly");
  }
  std::vector<double> h(n - 1), d(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    d[i] = (y_[i + 1] - y_[i]) / h[i];
  }

  // Tridiagonal system for M_1 .. M_{n-2}; the not-a-knot conditions are
  // eliminated into the first and last rows.
  const std::size_t m = n - 2;
  std::vector<double> lower(m, 0.0), diag(m, 0.0), upper(m, 0.0), rhs(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t i = k + 1;
    lower[k] = h[i - 1];
    diag[k] = 2.0 * (h[i - 1] + h[i]);
    upper[k] = h[i];
    rhs[k] = 6.0 * (d[i] - d[i - 1]);
  }
  {
    const double a = h[0], b = h[1];
    diag[0] = (a + b) * (a + 2.0 * b) / b;
    upper[0] = (b * b - a * a) / b;
    lower[0] = 0.0;
  }
  {
    const double a = h[n - 3], b = h[n - 2];
    lower[m - 1] = (a * a - b * b) / a;
    diag[m - 1] = (a + b) * (2.0 * a + b) / a;
    upper[m - 1] = 0.0;
  }
  for (std::size_t k = 1; k < m; ++k) {
    const double w = lower[k] / diag[k - 1];
    diag[k] -= w * upper[k - 1];
    rhs[k] -= w * rhs[k - 1];
  }
  std::vector<double> inner(m);
  inner[m - 1] = rhs[m - 1] / diag[m - 1];
  for (std::size_t k = m - 1; k-- > 0;) {
    inner[k] = (rhs[k] - upper[k] * inner[k + 1]) / diag[k];
  }
  m_.assign(n, 0.0);
  std::copy(inner.begin(), inner.end(), m_.begin() + 1);
  m_[0] = ((h[0] + h[1]) * m_[1] - h[0] * m_[2]) / h[1];
  {
    const double a = h[n - 3], b = h[n - 2];
    m_[n - 1] = ((a + b) * m_[n - 2] - b * m_[n - 3]) / a;
  }
}

SplineValue CubicSpline::evaluate(double x) const {
  if (x_.empty()) throw DomainError("CubicSpline: empty");
  std::size_t i = static_cast<std::size_t>(
      std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
  i = std::clamp<std::size_t>(i, 1, x_.size() - 1) - 1;
  const double h = x_[i + 1] - x_[i];
  const double l = x_[i + 1] - x;
  const double r = x - x_[i];
  const double ci = y_[i] / h - m_[i] * h / 6.0;
  const double cj = y_[i + 1] / h - m_[i + 1] * h / 6.0;
  SplineValue v;
  v.value = m_[i] * l * l * l / (6.0 * h) + m_[i + 1] * r * r * r / (6.0 * h) + ci * l + cj * r;
  v.first = -m_[i] * l * l / (2.0 * h) + m_[i + 1] * r * r / (2.0 * h) - ci + cj;
  v.second = (m_[i] * l + m_[i + 1] * r) / h;
  return v;
}

}  // namespace rflab

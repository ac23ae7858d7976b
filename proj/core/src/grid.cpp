#include "rflab/grid.hpp"

#include <cmath>
#include <limits>

#include "rflab/error.hpp"

namespace rflab {

std::vector<double> Axis::nodes() const {
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) out[i] = at(i);
  return out;
}

Axis make_axis(double lo, double hi, int count) {
  if (count < 2) throw DomainError("axis needs at least two nodes");
  if (!(hi > lo)) throw DomainError("axis bounds must satisfy lo < hi");
  return Axis{lo, hi, count};
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool available(const LineSamples& s, int k) {
  if (k >= s.count) return false;
  return k >= 0 || (s.even_at_zero && -k < s.count);
}

double sample(const LineSamples& s, int k) { return s.at(k < 0 ? -k : k); }

// Derivative with stride m (step m*h); returns NaN when no stencil fits.
double d1_stride(const LineSamples& s, int k, int m) {
  const double h = m * s.step;
  if (available(s, k - m) && available(s, k + m)) {
    return (sample(s, k + m) - sample(s, k - m)) / (2 * h);
  }
  if (available(s, k + 2 * m) && available(s, k)) {
    return (-3 * sample(s, k) + 4 * sample(s, k + m) - sample(s, k + 2 * m)) / (2 * h);
  }
  if (available(s, k - 2 * m)) {
    return (3 * sample(s, k) - 4 * sample(s, k - m) + sample(s, k - 2 * m)) / (2 * h);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double d2_stride(const LineSamples& s, int k, int m) {
  const double h = m * s.step;
  if (available(s, k - m) && available(s, k + m)) {
    return (sample(s, k + m) - 2 * sample(s, k) + sample(s, k - m)) / (h * h);
  }
  if (available(s, k + 3 * m)) {
    return (2 * sample(s, k) - 5 * sample(s, k + m) + 4 * sample(s, k + 2 * m) -
            sample(s, k + 3 * m)) /
           (h * h);
  }
  if (available(s, k - 3 * m)) {
    return (2 * sample(s, k) - 5 * sample(s, k - m) + 4 * sample(s, k - 2 * m) -
            sample(s, k - 3 * m)) /
           (h * h);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

Derivative with_richardson(double dh, double d2h) {
  if (std::isnan(dh)) throw DomainError("line too short for a finite-difference stencil");
  return {dh, std::isnan(d2h) ? kInf : std::abs(dh - d2h) / 3.0};
}

}  // namespace

Derivative diff1(const LineSamples& line, int k) {
  return with_richardson(d1_stride(line, k, 1), d1_stride(line, k, 2));
}

Derivative diff2(const LineSamples& line, int k) {
  return with_richardson(d2_stride(line, k, 1), d2_stride(line, k, 2));
}

LineSamples rho_line(const Field2D& f, int j, bool even_at_zero) {
  return {[&f, j](int i) { return f(i, j); }, f.rho.count, f.rho.step(), even_at_zero};
}

LineSamples tau_line(const Field2D& f, int i) {
  return {[&f, i](int j) { return f(i, j); }, f.tau.count, f.tau.step(), false};
}

}  // namespace rflab

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rflab {

struct SplineValue {
  double value;
  double first;
  double second;
};

// C2 interpolating cubic spline with not-a-knot end conditions. The
// interpolant is differentiated analytically, so the first and second
// derivatives are the exact derivatives of the piecewise cubic.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::span<const double> x, std::span<const double> y);

  SplineValue evaluate(double x) const;
  double operator()(double x) const { return evaluate(x).value; }

  double front() const { return x_.front(); }
  double back() const { return x_.back(); }
  std::size_t size() const { return x_.size(); }
  bool empty() const { return x_.empty(); }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> m_;  // second derivatives at the knots
};

}  // namespace rflab

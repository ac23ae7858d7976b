#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace rflab {

// Uniform axis lo, lo + step, ..., hi with `count` nodes.
struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  int count = 2;

  double step() const { return (hi - lo) / (count - 1); }
  double at(int i) const { return i == count - 1 ? hi : lo + i * step(); }
  std::vector<double> nodes() const;
};

Axis make_axis(double lo, double hi, int count);

// Values on a rho x tau tensor grid, rho index fastest.
struct Field2D {
  Axis rho;
  Axis tau;
  std::vector<double> values;

  Field2D() = default;
  Field2D(Axis r, Axis t) : rho(r), tau(t), values(static_cast<std::size_t>(r.count) * t.count) {}

  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * rho.count + i; }
  double& operator()(int i, int j) { return values[index(i, j)]; }
  double operator()(int i, int j) const { return values[index(i, j)]; }
};

struct Derivative {
  double value = 0.0;
  double error = 0.0;  // Richardson estimate |D_h - D_2h| / 3, +inf if unavailable
};

// Samples along one grid line. `even_at_zero` mirrors negative indices,
// u(-k) = u(k), which is the even extension of a radial field through the pole.
struct LineSamples {
  std::function<double(int)> at;
  int count = 0;
  double step = 1.0;
  bool even_at_zero = false;
};

// Second-order first and second derivatives at index k: central where a
// neighbour exists on both sides, one-sided second order at the edges.
Derivative diff1(const LineSamples& line, int k);
Derivative diff2(const LineSamples& line, int k);

// Convenience views of a Field2D.
LineSamples rho_line(const Field2D& f, int j, bool even_at_zero);
LineSamples tau_line(const Field2D& f, int i);

}  // namespace rflab

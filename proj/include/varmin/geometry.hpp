#pragma once

#include <array>
#include <cmath>

namespace varmin {

// Points in Ω̄ and gradient vectors share one fixed-size type; in 1D the
// second component is kept at zero.
using Vec = std::array<double, 2>;

inline double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(const Vec& a) { return std::hypot(a[0], a[1]); }

inline Vec operator+(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec operator-(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec operator*(double s, const Vec& a) { return {s * a[0], s * a[1]}; }

// Interval (a,b) when dim == 1, rectangle (a,b)x(c,d) when dim == 2.
struct Domain {
  int dim = 1;
  double a = 0.0, b = 1.0;
  double c = 0.0, d = 1.0;

  static Domain interval(double a, double b);
  static Domain rectangle(double a, double b, double c, double d);

  double measure() const { return dim == 1 ? (b - a) : (b - a) * (d - c); }
  double diameter() const { return dim == 1 ? (b - a) : std::hypot(b - a, d - c); }
  Vec center() const { return {0.5 * (a + b), dim == 1 ? 0.0 : 0.5 * (c + d)}; }
  bool contains(const Vec& x, double slack = 1e-12) const;
  bool on_boundary(const Vec& x, double slack = 1e-12) const;
};

}  // namespace varmin

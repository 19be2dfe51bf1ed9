#pragma once

#include <array>
#include <cmath>
#include <span>

namespace glc {

// Ambient-space point for chain geometry. Chains live in R^2 or R^3;
// 2D points keep z = 0.
using Point = std::array<double, 3>;

inline Point operator+(const Point& a, const Point& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Point operator-(const Point& a, const Point& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Point operator*(double s, const Point& a) {
  return {s * a[0], s * a[1], s * a[2]};
}

inline double dot(const Point& a, const Point& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline Point cross(const Point& a, const Point& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Point& a) { return std::sqrt(dot(a, a)); }
inline double dist(const Point& a, const Point& b) { return norm(a - b); }

// Distance from p to the closed segment [a, b].
inline double dist_point_segment(const Point& p, const Point& a, const Point& b) {
  const Point ab = b - a;
  const double l2 = dot(ab, ab);
  if (l2 == 0.0) return dist(p, a);
  double t = dot(p - a, ab) / l2;
  t = std::clamp(t, 0.0, 1.0);
  return dist(p, a + t * ab);
}

inline double sqr(double x) { return x * x; }

}  // namespace glc

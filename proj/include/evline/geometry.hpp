#pragma once

#include <cmath>
#include <optional>

namespace evline {

struct Vec2 {
  double x = 0;
  double y = 0;

  constexpr Vec2 operator+(Vec2 o) const noexcept { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const noexcept { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const noexcept { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const noexcept { return {x / s, y / s}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) noexcept { return std::hypot(a.x, a.y); }
constexpr Vec2 lerp(Vec2 a, Vec2 b, double s) noexcept { return a + (b - a) * s; }

// Axis-aligned closed rectangle [x0, x1] x [y0, y1].
struct Rect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  constexpr bool contains(Vec2 p) const noexcept {
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  }
  // Euclidean distance from p to the rectangle; 0 inside.
  double distance_to(Vec2 p) const noexcept {
    const double dx = p.x < x0 ? x0 - p.x : (p.x > x1 ? p.x - x1 : 0.0);
    const double dy = p.y < y0 ? y0 - p.y : (p.y > y1 ? p.y - y1 : 0.0);
    return std::hypot(dx, dy);
  }
};

// Parametric interval [t_in, t_out] of p0 + t (p1 - p0), t in [t_lo, t_hi], inside a
// closed rectangle (Liang-Barsky). Empty when the line misses the rectangle.
struct ClipInterval {
  double t_in;
  double t_out;
};

inline std::optional<ClipInterval> clip_parametric(Vec2 p0, Vec2 p1, const Rect& r,
                                                   double t_lo, double t_hi) noexcept {
  const Vec2 d = p1 - p0;
  const double p[4] = {-d.x, d.x, -d.y, d.y};
  const double q[4] = {p0.x - r.x0, r.x1 - p0.x, p0.y - r.y0, r.y1 - p0.y};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return std::nullopt;
      continue;
    }
    const double t = q[i] / p[i];
    if (p[i] < 0.0) {
      if (t > t_lo) t_lo = t;
    } else {
      if (t < t_hi) t_hi = t;
    }
    if (t_lo > t_hi) return std::nullopt;
  }
  return ClipInterval{t_lo, t_hi};
}

}  // namespace evline

#pragma once

#include "fva/nav/environment.hpp"

#include <span>

namespace fva::nav {

/// True when segment a-b passes through the interior of `poly`. Touching the
/// boundary (a vertex, or sliding along an edge) does not count.
inline bool crosses_interior(const Polygon& poly, Vec2 a, Vec2 b) {
  const Vec2 d = b - a;
  double t0 = 0.0;
  double t1 = 1.0;
  const auto& v = poly.vertices();
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = v[i];
    const Vec2 q = v[(i + 1) % n];
    // Inside (closed) means left_of(p, q, x) >= 0, which is linear in t.
    const double f0 = left_of(p, q, a);
    const double df = left_of(p, q, b) - f0;
    if (df == 0.0) {
      if (f0 < 0.0) return false;
      continue;
    }
    const double t = -f0 / df;
    if (df > 0.0) t0 = std::max(t0, t);
    else t1 = std::min(t1, t);
    if (t0 > t1) return false;
  }
  if (!(t1 > t0)) return false;
  const Vec2 mid = a + (0.5 * (t0 + t1)) * d;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(left_of(v[i], v[(i + 1) % n], mid) > 0.0)) return false;
  }
  return true;
}

inline bool line_of_sight(std::span<const Polygon> obstacles, Vec2 a, Vec2 b) {
  for (const auto& p : obstacles) {
    if (crosses_interior(p, a, b)) return false;
  }
  return true;
}

inline bool line_of_sight(const EnvironmentState& env, Vec2 a, Vec2 b) {
  return line_of_sight(std::span<const Polygon>(env.obstacles), a, b);
}

}  // namespace fva::nav

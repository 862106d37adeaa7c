#pragma once

#include <cmath>
#include <numbers>

namespace fva {

/// 2D vector in the ground plane (meters, or m/s for velocities).
struct Vec2 {
  double x{0.0};
  double y{0.0};

  constexpr Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
constexpr double det(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
constexpr double abs_sq(const Vec2& v) { return dot(v, v); }
inline double length(const Vec2& v) { return std::sqrt(abs_sq(v)); }

inline Vec2 normalize(const Vec2& v) {
  const double len = length(v);
  return len > 0.0 ? v / len : Vec2{};
}

/// Signed area test: > 0 when c lies left of the directed line a->b.
constexpr double left_of(const Vec2& a, const Vec2& b, const Vec2& c) {
  return det(a - c, b - a);
}

inline double dist_sq_point_segment(const Vec2& a, const Vec2& b, const Vec2& c) {
  const Vec2 ab = b - a;
  const double len_sq = abs_sq(ab);
  if (len_sq == 0.0) return abs_sq(c - a);
  const double r = dot(c - a, ab) / len_sq;
  if (r < 0.0) return abs_sq(c - a);
  if (r > 1.0) return abs_sq(c - b);
  return abs_sq(c - (a + r * ab));
}

/// Rotates v counterclockwise by `radians`.
inline Vec2 rotate(const Vec2& v, double radians) {
  const double c = std::cos(radians);
  const double s = std::sin(radians);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Wraps an angle difference in degrees to (-180, 180].
inline double wrap_degrees(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r <= -180.0) r += 360.0;
  else if (r > 180.0) r -= 360.0;
  return r;
}

/// Wraps an angle in radians to (-pi, pi].
inline double wrap_radians(double rad) {
  double r = std::fmod(rad, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
  else if (r > std::numbers::pi) r -= 2.0 * std::numbers::pi;
  return r;
}

}  // namespace fva

#pragma once

#include <cmath>
#include <stdexcept>

namespace ot2d {

/// Point / displacement in the plane. Components are validated finite on
/// construction so NaN/Inf cannot leak into downstream arithmetic.
struct Vec2 {
  double x1 = 0.0;
  double x2 = 0.0;

  Vec2() = default;
  Vec2(double a, double b) : x1(a), x2(b) {
    if (!std::isfinite(a) || !std::isfinite(b)) {
      throw std::invalid_argument("Vec2: component is not finite");
    }
  }

  Vec2 operator+(Vec2 o) const { return {x1 + o.x1, x2 + o.x2}; }
  Vec2 operator-(Vec2 o) const { return {x1 - o.x1, x2 - o.x2}; }
  Vec2 operator-() const { return {-x1, -x2}; }
  Vec2 operator*(double s) const { return {x1 * s, x2 * s}; }
  bool operator==(const Vec2&) const = default;
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

inline double dot(Vec2 a, Vec2 b) { return a.x1 * b.x1 + a.x2 * b.x2; }
inline double cross(Vec2 a, Vec2 b) { return a.x1 * b.x2 - a.x2 * b.x1; }
inline double norm_sq(Vec2 a) { return dot(a, a); }
inline double norm(Vec2 a) { return std::hypot(a.x1, a.x2); }

}  // namespace ot2d

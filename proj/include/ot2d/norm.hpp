#pragma once

#include <optional>
#include <vector>

#include "ot2d/geometry.hpp"

namespace ot2d {

/// Flat boundary piece of a polyhedral unit ball: the edge [a, b] together
/// with its support functional n, the unique covector with <n, a> = <n, b> = 1.
/// On the cone spanned by the face, gauge(z) equals <n, z>.
struct Face {
  int id = 0;
  Vec2 a, b;        // edge endpoints, counter-clockwise order
  Vec2 n;           // support functional of the edge
  Vec2 tangent;     // unit vector along b - a
};

/// A norm given either by the Euclidean unit disk or by a polyhedral unit
/// ball (an origin-symmetric convex polygon with 0 in its interior).
class NormSpec {
 public:
  static NormSpec euclidean();
  static NormSpec polyhedral(ConvexPolygon ball);

  bool is_euclidean() const { return euclidean_; }
  const ConvexPolygon& ball() const;

  /// Minkowski gauge: homogeneous, gauge(z) = 1 exactly on the unit sphere.
  double gauge(Vec2 z) const;

  /// Faces of the unit ball in edge order. Empty for the Euclidean norm.
  const std::vector<Face>& faces() const { return faces_; }

  /// Index of the unique face whose cone contains direction z within
  /// relative tolerance tol, nullopt when the direction is extreme (hits a
  /// vertex of the ball) or the norm is Euclidean.
  /// Throws ZeroDisplacementError for z = 0.
  std::optional<int> face_of_direction(Vec2 z, double tol = kDefaultGeomTol) const;

 private:
  NormSpec() = default;

  bool euclidean_ = true;
  std::optional<ConvexPolygon> ball_;
  std::vector<Face> faces_;
};

}  // namespace ot2d

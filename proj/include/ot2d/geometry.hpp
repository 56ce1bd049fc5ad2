#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "ot2d/vec2.hpp"

namespace ot2d {

/// Default relative geometric tolerance used by membership and face tests.
inline constexpr double kDefaultGeomTol = 1e-9;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  bool contains(double s, double tol = 0.0) const { return s >= lo - tol && s <= hi + tol; }
};

/// Closed convex polygon. Vertices are stored counter-clockwise with strict
/// convexity enforced at construction; collinear input vertices are merged.
class ConvexPolygon {
 public:
  explicit ConvexPolygon(std::vector<Vec2> vertices);

  const std::vector<Vec2>& vertices() const { return verts_; }
  int size() const { return static_cast<int>(verts_.size()); }
  Vec2 vertex(int i) const;  // cyclic index

  /// Largest signed Euclidean distance of p outside any edge line
  /// (non-positive when p is inside).
  double outside_slack(Vec2 p) const;

  /// Membership within tol * scale(), where scale() = max(1, max |vertex|).
  bool contains(Vec2 p, double tol = kDefaultGeomTol) const;

  /// Euclidean projection onto the polygon.
  Vec2 project(Vec2 p) const;

  /// One-dimensional section along the line t*f1 + s*f2: returns the interval
  /// of s with (t*f1 + s*f2) in K, or nullopt when the section is empty.
  std::optional<Interval> section(double t, Vec2 f1, Vec2 f2, double tol = kDefaultGeomTol) const;

  /// True when l lies in the normal cone of the polygon at z, i.e.
  /// <l, k - z> <= tol-scaled slack for every vertex k.
  /// Throws PointNotInBodyError when z is not in the polygon within tol.
  bool normal_cone_contains(Vec2 z, Vec2 l, double tol = kDefaultGeomTol) const;

  double scale() const { return scale_; }

 private:
  std::vector<Vec2> verts_;
  double scale_ = 1.0;
};

/// Closed disk centered at the origin.
struct Disk {
  double radius = 1.0;

  explicit Disk(double r);
  bool contains(Vec2 p, double tol = kDefaultGeomTol) const;
  Vec2 project(Vec2 p) const;
};

using ConvexBody = std::variant<ConvexPolygon, Disk>;

bool body_contains(const ConvexBody& K, Vec2 p, double tol = kDefaultGeomTol);
Vec2 project_onto(const ConvexBody& K, Vec2 p);
double body_scale(const ConvexBody& K);

/// Minkowski gauge of a polygon with 0 in its interior evaluated at z:
/// max_i <a_i, z> over the edge support functionals <a_i, x> <= 1.
/// Edges whose supporting line passes through the origin make the gauge
/// +infinity on the outward side; the returned double is +inf there.
double polygon_gauge(const ConvexPolygon& ball, Vec2 z);

}  // namespace ot2d

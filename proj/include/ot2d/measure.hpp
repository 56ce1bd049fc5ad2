#pragma once

#include <vector>

#include "ot2d/vec2.hpp"

namespace ot2d {

/// Finitely supported probability measure: pairwise distinct atoms with
/// strictly positive masses summing to 1 within 1e-12.
class DiscreteMeasure {
 public:
  DiscreteMeasure(std::vector<Vec2> points, std::vector<double> masses);

  int size() const { return static_cast<int>(points_.size()); }
  const std::vector<Vec2>& points() const { return points_; }
  const std::vector<double>& masses() const { return masses_; }
  Vec2 point(int i) const { return points_[i]; }
  double mass(int i) const { return masses_[i]; }

  /// True when all masses agree within tol (absolute).
  bool equal_masses(double tol = 1e-12) const;

 private:
  std::vector<Vec2> points_;
  std::vector<double> masses_;
};

/// Diameter of the union of both supports (max bounding-box diagonal),
/// used to scale coordinate quantization tolerances.
double joint_diameter(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

}  // namespace ot2d

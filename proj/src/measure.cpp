#include "ot2d/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ot2d {

DiscreteMeasure::DiscreteMeasure(std::vector<Vec2> points, std::vector<double> masses)
    : points_(std::move(points)), masses_(std::move(masses)) {
  if (points_.empty() || points_.size() != masses_.size()) {
    throw std::invalid_argument("DiscreteMeasure: point/mass lists must be non-empty and equal");
  }
  double total = 0.0;
  for (double m : masses_) {
    if (!(m > 0.0) || !std::isfinite(m)) {
      throw std::invalid_argument("DiscreteMeasure: masses must be positive and finite");
    }
    total += m;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("DiscreteMeasure: masses must sum to 1 within 1e-12");
  }

  std::vector<Vec2> sorted = points_;
  std::sort(sorted.begin(), sorted.end(), [](Vec2 a, Vec2 b) {
    return a.x1 != b.x1 ? a.x1 < b.x1 : a.x2 < b.x2;
  });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] == sorted[i - 1]) {
      throw std::invalid_argument("DiscreteMeasure: atoms must be pairwise distinct");
    }
  }
}

bool DiscreteMeasure::equal_masses(double tol) const {
  const auto [lo, hi] = std::minmax_element(masses_.begin(), masses_.end());
  return *hi - *lo <= tol;
}

double joint_diameter(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  double x1lo = mu.point(0).x1, x1hi = x1lo;
  double x2lo = mu.point(0).x2, x2hi = x2lo;
  auto absorb = [&](Vec2 p) {
    x1lo = std::min(x1lo, p.x1);
    x1hi = std::max(x1hi, p.x1);
    x2lo = std::min(x2lo, p.x2);
    x2hi = std::max(x2hi, p.x2);
  };
  for (const Vec2& p : mu.points()) absorb(p);
  for (const Vec2& p : nu.points()) absorb(p);
  return std::hypot(x1hi - x1lo, x2hi - x2lo);
}

}  // namespace ot2d

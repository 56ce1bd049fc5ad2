#pragma once

#include <cassert>
#include <limits>
#include <stdexcept>
#include <variant>

#include "ot2d/geometry.hpp"
#include "ot2d/norm.hpp"

namespace ot2d {

/// Extended real value: a finite double or +infinity, kept as an explicit
/// tag so sentinel floats never flow through arithmetic unnoticed.
class ExtReal {
 public:
  ExtReal() = default;

  static ExtReal finite(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("ExtReal::finite: value is not finite");
    ExtReal r;
    r.value_ = v;
    r.finite_ = true;
    return r;
  }
  static ExtReal infinity() { return ExtReal{}; }

  bool is_finite() const { return finite_; }

  double value() const {
    if (!finite_) throw std::logic_error("ExtReal::value on infinite value");
    return value_;
  }
  double value_or(double fallback) const { return finite_ ? value_ : fallback; }

  ExtReal operator+(const ExtReal& o) const {
    if (!finite_ || !o.finite_) return infinity();
    return finite_sum(value_ + o.value_);
  }
  ExtReal& operator+=(const ExtReal& o) { return *this = *this + o; }
  ExtReal operator*(double s) const {
    if (!finite_) return infinity();
    return finite_sum(value_ * s);
  }

  bool operator<(const ExtReal& o) const {
    if (finite_ && o.finite_) return value_ < o.value_;
    return finite_ && !o.finite_;
  }
  bool operator==(const ExtReal& o) const {
    return finite_ == o.finite_ && (!finite_ || value_ == o.value_);
  }

 private:
  static ExtReal finite_sum(double v) {
    // overflow of a finite sum is a genuine error at the scales handled here
    return finite(v);
  }

  double value_ = std::numeric_limits<double>::infinity();
  bool finite_ = false;
};

/// Scalar convex profile applied to a gauge or to a single coordinate.
struct ScalarH {
  enum class Kind { kPower, kShiftedSquarePlus };

  Kind kind = Kind::kPower;
  double exponent = 2.0;  // used by kPower only, must be > 1

  static ScalarH power(double p);
  static ScalarH shifted_square_plus();

  /// kPower: |t|^p. kShiftedSquarePlus: max(t - 1, 0)^2.
  double operator()(double t) const;
  double derivative(double t) const;

  /// Strict convexity on [0, +inf): true for powers, false for the shifted
  /// square which is flat on [0, 1].
  bool strictly_convex() const { return kind == Kind::kPower; }
};

/// Orthonormal positively-oriented coordinate frame.
struct Frame {
  Vec2 e1{1.0, 0.0};
  Vec2 e2{0.0, 1.0};
};

/// c(z) = h(gauge(z)).
struct HNormCost {
  ScalarH h;
  NormSpec norm;

  HNormCost(ScalarH h_, NormSpec norm_);
};

/// c(z) = |z|^2 / 2 on K, +infinity outside.
struct ConstrainedQuadraticCost {
  ConvexBody K;
  explicit ConstrainedQuadraticCost(ConvexBody body) : K(std::move(body)) {}
};

/// c(z) = |<e1, z>|^p on K, +infinity outside. Strictly convex in the first
/// frame coordinate only.
struct ConstrainedOneVarCost {
  double exponent;
  Frame frame;
  ConvexPolygon K;

  ConstrainedOneVarCost(double p, Frame f, ConvexPolygon body);
};

using CostSpec = std::variant<HNormCost, ConstrainedQuadraticCost, ConstrainedOneVarCost>;

/// Cost of a displacement z = x - y. Finite everywhere for HNormCost,
/// +infinity outside K (beyond tol) for the constrained families.
ExtReal cost_eval(const CostSpec& c, Vec2 z, double tol = kDefaultGeomTol);

/// True when a cheapest plan is unique-displacement-rigid: HNormCost with a
/// power profile over the Euclidean norm, or the constrained quadratic.
/// False for polyhedral norms, the shifted square profile, and the
/// one-variable constrained family (flat in the second frame coordinate).
bool is_strictly_convex_cost(const CostSpec& c);

}  // namespace ot2d

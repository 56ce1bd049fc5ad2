#include "ot2d/cost.hpp"

#include <cmath>
#include <stdexcept>

namespace ot2d {

ScalarH ScalarH::power(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw std::invalid_argument("ScalarH::power: exponent must be finite and > 1");
  }
  ScalarH h;
  h.kind = Kind::kPower;
  h.exponent = p;
  return h;
}

ScalarH ScalarH::shifted_square_plus() {
  ScalarH h;
  h.kind = Kind::kShiftedSquarePlus;
  h.exponent = 2.0;
  return h;
}

double ScalarH::operator()(double t) const {
  switch (kind) {
    case Kind::kPower:
      if (exponent == 2.0) return t * t;
      return std::pow(std::fabs(t), exponent);
    case Kind::kShiftedSquarePlus: {
      const double s = t - 1.0;
      return s > 0.0 ? s * s : 0.0;
    }
  }
  return 0.0;
}

double ScalarH::derivative(double t) const {
  switch (kind) {
    case Kind::kPower: {
      if (exponent == 2.0) return 2.0 * t;
      const double m = exponent * std::pow(std::fabs(t), exponent - 1.0);
      return t >= 0.0 ? m : -m;
    }
    case Kind::kShiftedSquarePlus: {
      const double s = t - 1.0;
      return s > 0.0 ? 2.0 * s : 0.0;
    }
  }
  return 0.0;
}

HNormCost::HNormCost(ScalarH h_, NormSpec norm_) : h(h_), norm(std::move(norm_)) {
  if (h.kind == ScalarH::Kind::kShiftedSquarePlus && !norm.is_euclidean()) {
    throw std::invalid_argument(
        "HNormCost: the shifted square profile is only supported over the Euclidean norm");
  }
}

ConstrainedOneVarCost::ConstrainedOneVarCost(double p, Frame f, ConvexPolygon body)
    : exponent(p), frame(f), K(std::move(body)) {
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw std::invalid_argument("ConstrainedOneVarCost: exponent must be finite and > 1");
  }
  const double tol = 1e-9;
  if (std::fabs(norm(f.e1) - 1.0) > tol || std::fabs(norm(f.e2) - 1.0) > tol ||
      std::fabs(dot(f.e1, f.e2)) > tol || cross(f.e1, f.e2) <= 0.0) {
    throw std::invalid_argument(
        "ConstrainedOneVarCost: frame must be orthonormal and positively oriented");
  }
}

ExtReal cost_eval(const CostSpec& c, Vec2 z, double tol) {
  if (const auto* hn = std::get_if<HNormCost>(&c)) {
    return ExtReal::finite(hn->h(hn->norm.gauge(z)));
  }
  if (const auto* cq = std::get_if<ConstrainedQuadraticCost>(&c)) {
    if (!body_contains(cq->K, z, tol)) return ExtReal::infinity();
    return ExtReal::finite(0.5 * norm_sq(z));
  }
  const auto& ov = std::get<ConstrainedOneVarCost>(c);
  if (!ov.K.contains(z, tol)) return ExtReal::infinity();
  const double t = dot(ov.frame.e1, z);
  const double v = ov.exponent == 2.0 ? t * t : std::pow(std::fabs(t), ov.exponent);
  return ExtReal::finite(v);
}

bool is_strictly_convex_cost(const CostSpec& c) {
  if (const auto* hn = std::get_if<HNormCost>(&c)) {
    return hn->norm.is_euclidean() && hn->h.strictly_convex();
  }
  return std::holds_alternative<ConstrainedQuadraticCost>(c);
}

}  // namespace ot2d

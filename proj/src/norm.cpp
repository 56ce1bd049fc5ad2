#include "ot2d/norm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ot2d/errors.hpp"

namespace ot2d {

NormSpec NormSpec::euclidean() {
  NormSpec s;
  s.euclidean_ = true;
  return s;
}

NormSpec NormSpec::polyhedral(ConvexPolygon ball) {
  const auto& v = ball.vertices();
  const int n = static_cast<int>(v.size());
  const double eps = 1e-9 * ball.scale();

  // unit ball of a norm: origin-symmetric with 0 strictly inside
  if (ball.outside_slack(Vec2{0.0, 0.0}) > -eps) {
    throw std::invalid_argument("NormSpec::polyhedral: origin is not interior to the ball");
  }
  for (int i = 0; i < n; ++i) {
    bool paired = false;
    for (int j = 0; j < n; ++j) {
      if (norm(v[i] + v[j]) <= eps) {
        paired = true;
        break;
      }
    }
    if (!paired) {
      throw std::invalid_argument("NormSpec::polyhedral: ball is not origin-symmetric");
    }
  }

  NormSpec s;
  s.euclidean_ = false;
  s.faces_.reserve(v.size());
  for (int i = 0; i < n; ++i) {
    Face f;
    f.id = i;
    f.a = v[i];
    f.b = v[(i + 1) % n];
    const double det = cross(f.a, f.b);
    // det = 0 would put the edge line through the origin, impossible here
    f.n = Vec2{(f.b.x2 - f.a.x2) / det, (f.a.x1 - f.b.x1) / det};
    const Vec2 e = f.b - f.a;
    f.tangent = e * (1.0 / norm(e));
    s.faces_.push_back(f);
  }
  s.ball_ = std::move(ball);
  return s;
}

const ConvexPolygon& NormSpec::ball() const {
  if (euclidean_) throw std::logic_error("NormSpec::ball: Euclidean norm has no polyhedral ball");
  return *ball_;
}

double NormSpec::gauge(Vec2 z) const {
  if (euclidean_) return norm(z);
  double g = 0.0;
  for (const Face& f : faces_) g = std::max(g, dot(f.n, z));
  return g;
}

std::optional<int> NormSpec::face_of_direction(Vec2 z, double tol) const {
  if (z.x1 == 0.0 && z.x2 == 0.0) throw ZeroDisplacementError{};
  if (euclidean_) return std::nullopt;

  const double g = gauge(z);
  const double eps = tol * g;
  int hit = -1;
  for (const Face& f : faces_) {
    if (std::fabs(dot(f.n, z) - g) <= eps) {
      if (hit >= 0) return std::nullopt;  // on a vertex ray, two faces tie
      hit = f.id;
    }
  }
  return hit >= 0 ? std::optional<int>(hit) : std::nullopt;
}

}  // namespace ot2d

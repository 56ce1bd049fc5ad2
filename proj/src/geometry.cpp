#include "ot2d/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ot2d/errors.hpp"

namespace ot2d {

namespace {

double polygon_signed_area2(const std::vector<Vec2>& v) {
  double a = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2& p = v[i];
    const Vec2& q = v[(i + 1) % v.size()];
    a += cross(p, q);
  }
  return a;
}

Vec2 closest_point_on_segment(Vec2 a, Vec2 b, Vec2 p) {
  const Vec2 d = b - a;
  const double len2 = norm_sq(d);
  if (len2 == 0.0) return a;
  double t = dot(p - a, d) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return a + d * t;
}

}  // namespace

ConvexPolygon::ConvexPolygon(std::vector<Vec2> vertices) {
  if (vertices.size() < 3) {
    throw std::invalid_argument("ConvexPolygon: needs at least 3 vertices");
  }
  if (polygon_signed_area2(vertices) < 0.0) {
    std::reverse(vertices.begin(), vertices.end());
  }

  double scale = 0.0;
  for (const Vec2& v : vertices) scale = std::max({scale, std::fabs(v.x1), std::fabs(v.x2)});
  const double collinear_eps = 1e-12 * std::max(1.0, scale * scale);

  // drop middle vertices of collinear runs (cyclic)
  std::vector<Vec2> kept = std::move(vertices);
  bool changed = true;
  while (changed && kept.size() > 2) {
    changed = false;
    std::vector<Vec2> next;
    next.reserve(kept.size());
    const std::size_t k = kept.size();
    for (std::size_t i = 0; i < k; ++i) {
      const Vec2& prev = kept[(i + k - 1) % k];
      const Vec2& cur = kept[i];
      const Vec2& nxt = kept[(i + 1) % k];
      const double turn = cross(cur - prev, nxt - cur);
      if (std::fabs(turn) <= collinear_eps || (cur == nxt)) {
        changed = true;  // cur is redundant
        continue;
      }
      next.push_back(cur);
    }
    kept = std::move(next);
  }

  if (kept.size() < 3) {
    throw std::invalid_argument("ConvexPolygon: degenerate (fewer than 3 extreme vertices)");
  }
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const Vec2& prev = kept[(i + kept.size() - 1) % kept.size()];
    const Vec2& cur = kept[i];
    const Vec2& nxt = kept[(i + 1) % kept.size()];
    if (cross(cur - prev, nxt - cur) <= 0.0) {
      throw std::invalid_argument("ConvexPolygon: vertices are not in strictly convex position");
    }
  }

  verts_ = std::move(kept);
  scale_ = std::max(1.0, scale);
}

Vec2 ConvexPolygon::vertex(int i) const {
  const int n = size();
  int k = i % n;
  if (k < 0) k += n;
  return verts_[static_cast<std::size_t>(k)];
}

double ConvexPolygon::outside_slack(Vec2 p) const {
  double worst = -std::numeric_limits<double>::infinity();
  const int n = size();
  for (int i = 0; i < n; ++i) {
    const Vec2 a = verts_[i];
    const Vec2 b = verts_[(i + 1) % n];
    const Vec2 e = b - a;
    const double len = norm(e);
    // cross > 0 means p lies to the inner (left) side of the CCW edge
    const double d = cross(e, p - a) / len;
    worst = std::max(worst, -d);
  }
  return worst;
}

bool ConvexPolygon::contains(Vec2 p, double tol) const {
  return outside_slack(p) <= tol * scale_;
}

Vec2 ConvexPolygon::project(Vec2 p) const {
  if (outside_slack(p) <= 0.0) return p;
  double best_d2 = std::numeric_limits<double>::infinity();
  Vec2 best = verts_[0];
  const int n = size();
  for (int i = 0; i < n; ++i) {
    const Vec2 q = closest_point_on_segment(verts_[i], verts_[(i + 1) % n], p);
    const double d2 = norm_sq(q - p);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = q;
    }
  }
  return best;
}

std::optional<Interval> ConvexPolygon::section(double t, Vec2 f1, Vec2 f2, double tol) const {
  // clip the line s -> t*f1 + s*f2 against every edge half-plane
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  const int n = size();
  const double eps = tol * scale_;
  for (int i = 0; i < n; ++i) {
    const Vec2 a = verts_[i];
    const Vec2 b = verts_[(i + 1) % n];
    const Vec2 e = b - a;
    const double len = norm(e);
    const Vec2 nrm{e.x2 / len, -e.x1 / len};  // outward unit normal (CCW polygon)
    const double rhs = dot(nrm, a);
    const double coef = dot(nrm, f2);
    const double base = dot(nrm, f1) * t;
    if (std::fabs(coef) <= 1e-14) {
      if (base > rhs + eps) return std::nullopt;  // line entirely outside
      continue;
    }
    const double bound = (rhs - base) / coef;
    if (coef > 0.0) {
      hi = std::min(hi, bound);
    } else {
      lo = std::max(lo, bound);
    }
  }
  if (!(lo <= hi)) {
    if (lo - hi <= eps) {
      const double mid = 0.5 * (lo + hi);
      return Interval{mid, mid};
    }
    return std::nullopt;
  }
  return Interval{lo, hi};
}

bool ConvexPolygon::normal_cone_contains(Vec2 z, Vec2 l, double tol) const {
  const double slack = outside_slack(z);
  if (slack > tol * scale_) {
    throw PointNotInBodyError("normal_cone_contains: point is outside the body");
  }
  const double eps = tol * std::max(1.0, norm(l)) * scale_;
  for (const Vec2& k : verts_) {
    if (dot(l, k - z) > eps) return false;
  }
  return true;
}

Disk::Disk(double r) : radius(r) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw std::invalid_argument("Disk: radius must be positive and finite");
  }
}

bool Disk::contains(Vec2 p, double tol) const {
  return norm(p) <= radius + tol * std::max(1.0, radius);
}

Vec2 Disk::project(Vec2 p) const {
  const double r = norm(p);
  if (r <= radius) return p;
  return p * (radius / r);
}

bool body_contains(const ConvexBody& K, Vec2 p, double tol) {
  return std::visit([&](const auto& b) { return b.contains(p, tol); }, K);
}

Vec2 project_onto(const ConvexBody& K, Vec2 p) {
  return std::visit([&](const auto& b) { return b.project(p); }, K);
}

double body_scale(const ConvexBody& K) {
  if (const auto* poly = std::get_if<ConvexPolygon>(&K)) return poly->scale();
  return std::max(1.0, std::get<Disk>(K).radius);
}

double polygon_gauge(const ConvexPolygon& ball, Vec2 z) {
  if (z.x1 == 0.0 && z.x2 == 0.0) return 0.0;
  double g = 0.0;
  bool outside_flat = false;
  const int n = ball.size();
  for (int i = 0; i < n; ++i) {
    const Vec2 a = ball.vertex(i);
    const Vec2 b = ball.vertex(i + 1);
    const double det = cross(a, b);
    if (std::fabs(det) <= 1e-15 * ball.scale() * ball.scale()) {
      // edge line passes through the origin; gauge is +inf strictly outside it
      const Vec2 e = b - a;
      if (cross(e, z - a) < 0.0) outside_flat = true;
      continue;
    }
    const Vec2 nrm{(b.x2 - a.x2) / det, (a.x1 - b.x1) / det};  // <nrm,a> = <nrm,b> = 1
    g = std::max(g, dot(nrm, z));
  }
  if (outside_flat) return std::numeric_limits<double>::infinity();
  return g;
}

}  // namespace ot2d

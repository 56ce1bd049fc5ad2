#include "ot2d/svg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "ot2d/json_io.hpp"

namespace ot2d::svg {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 640.0;
constexpr double kMargin = 40.0;

const char* kFacePalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd",
                              "#8c564b", "#e377c2", "#17becf", "#bcbd22"};
constexpr const char* kRigidColor = "#9a9a9a";
constexpr const char* kAmbiguousColor = "#d62728";

struct Mapper {
  double x0, y0, scale;
  double px(const Vec2& p) const { return kMargin + (p.x1 - x0) * scale; }
  // SVG y grows downward
  double py(const Vec2& p) const { return kHeight - kMargin - (p.x2 - y0) * scale; }
};

Mapper fit(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  double lo1 = mu.point(0).x1, hi1 = lo1, lo2 = mu.point(0).x2, hi2 = lo2;
  auto grow = [&](const DiscreteMeasure& m) {
    for (int i = 0; i < m.size(); ++i) {
      lo1 = std::min(lo1, m.point(i).x1);
      hi1 = std::max(hi1, m.point(i).x1);
      lo2 = std::min(lo2, m.point(i).x2);
      hi2 = std::max(hi2, m.point(i).x2);
    }
  };
  grow(mu);
  grow(nu);
  const double span = std::max({hi1 - lo1, hi2 - lo2, 1e-9});
  return Mapper{lo1, lo2, (kWidth - 2.0 * kMargin) / span};
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(2);
  s << std::fixed << v;
  return s.str();
}

void line(std::ostringstream& out, double x1, double y1, double x2, double y2,
          const std::string& color, double width) {
  out << "  <line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2)
      << "\" y2=\"" << fmt(y2) << "\" stroke=\"" << color << "\" stroke-width=\"" << fmt(width)
      << "\" marker-end=\"url(#tip)\"/>\n";
}

void circle(std::ostringstream& out, double cx, double cy, double r, const std::string& fill,
            const std::string& stroke) {
  out << "  <circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy) << "\" r=\"" << fmt(r)
      << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\" stroke-width=\"1\"/>\n";
}

const char* face_color(int face_id) {
  return kFacePalette[static_cast<std::size_t>(face_id) %
                      (sizeof(kFacePalette) / sizeof(kFacePalette[0]))];
}

void draw_ball_inset(std::ostringstream& out, const NormSpec& norm) {
  if (norm.is_euclidean()) return;
  const double cx = kWidth - 70.0, cy = 70.0, r = 45.0;
  double extent = 0.0;
  for (const Vec2& v : norm.ball().vertices()) {
    extent = std::max({extent, std::fabs(v.x1), std::fabs(v.x2)});
  }
  const double s = r / extent;
  const auto& faces = norm.faces();
  for (std::size_t k = 0; k < faces.size(); ++k) {
    const Face& f = faces[k];
    out << "  <line x1=\"" << fmt(cx + f.a.x1 * s) << "\" y1=\"" << fmt(cy - f.a.x2 * s)
        << "\" x2=\"" << fmt(cx + f.b.x1 * s) << "\" y2=\"" << fmt(cy - f.b.x2 * s)
        << "\" stroke=\"" << face_color(static_cast<int>(k)) << "\" stroke-width=\"3\"/>\n";
  }
  circle(out, cx, cy, 1.5, "#000000", "none");
}

}  // namespace

std::string render_plan(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                        const TransportPlan& plan, const CostSpec& cost,
                        const FaceDecomposition* decomp) {
  const Mapper map = fit(mu, nu);

  // entry -> color index, resolved through the decomposition when present
  std::map<std::pair<int, int>, std::string> entry_color;
  if (decomp != nullptr) {
    for (const PlanEntry& e : decomp->rigid.entries) entry_color[{e.i, e.j}] = kRigidColor;
    for (const PlanEntry& e : decomp->ambiguous.entries) entry_color[{e.i, e.j}] = kAmbiguousColor;
    for (const auto& [face_id, sub] : decomp->per_face) {
      for (const PlanEntry& e : sub.entries) entry_color[{e.i, e.j}] = face_color(face_id);
    }
  }

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
      << "  <defs><marker id=\"tip\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" "
         "markerWidth=\"6\" markerHeight=\"6\" orient=\"auto-start-reverse\">"
         "<path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"context-stroke\"/></marker></defs>\n"
      << "  <rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

  double max_mass = 0.0;
  for (const PlanEntry& e : plan.entries) max_mass = std::max(max_mass, e.mass);
  for (const PlanEntry& e : plan.entries) {
    const Vec2 x = mu.point(e.i), y = nu.point(e.j);
    std::string color = kRigidColor;
    if (const auto it = entry_color.find({e.i, e.j}); it != entry_color.end()) {
      color = it->second;
    }
    const double w = 0.6 + 2.0 * (max_mass > 0.0 ? e.mass / max_mass : 0.0);
    line(out, map.px(x), map.py(x), map.px(y), map.py(y), color, w);
  }
  for (int i = 0; i < mu.size(); ++i) {
    circle(out, map.px(mu.point(i)), map.py(mu.point(i)), 3.0, "#1a1a1a", "none");
  }
  for (int j = 0; j < nu.size(); ++j) {
    circle(out, map.px(nu.point(j)), map.py(nu.point(j)), 3.5, "none", "#1a1a1a");
  }

  if (const auto* hn = std::get_if<HNormCost>(&cost)) draw_ball_inset(out, hn->norm);
  out << "</svg>\n";
  return out.str();
}

void render_plan_to_file(const std::string& path, const DiscreteMeasure& mu,
                         const DiscreteMeasure& nu, const TransportPlan& plan,
                         const CostSpec& cost, const FaceDecomposition* decomp) {
  io::write_text_file(path, render_plan(mu, nu, plan, cost, decomp));
}

}  // namespace ot2d::svg

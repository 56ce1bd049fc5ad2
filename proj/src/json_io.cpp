#include "ot2d/json_io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ot2d::io {

namespace {

double number_at(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw std::invalid_argument(std::string("json: missing numeric field '") + key + "'");
  }
  return j.at(key).get<double>();
}

std::string kind_of(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
    throw std::invalid_argument("json: object with a 'kind' string expected");
  }
  return j.at("kind").get<std::string>();
}

json vertices_json(const std::vector<Vec2>& vs) {
  json arr = json::array();
  for (const Vec2& v : vs) arr.push_back(to_json(v));
  return arr;
}

std::vector<Vec2> vertices_from(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw std::invalid_argument(std::string("json: missing array field '") + key + "'");
  }
  std::vector<Vec2> out;
  for (const json& v : j.at(key)) out.push_back(vec2_from_json(v));
  return out;
}

}  // namespace

json to_json(const Vec2& v) { return json::array({v.x1, v.x2}); }

Vec2 vec2_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw std::invalid_argument("json: Vec2 must be [x1, x2]");
  }
  return Vec2{j[0].get<double>(), j[1].get<double>()};
}

json to_json(const DiscreteMeasure& mu) {
  json pts = json::array();
  json ms = json::array();
  for (int i = 0; i < mu.size(); ++i) {
    pts.push_back(to_json(mu.point(i)));
    ms.push_back(mu.mass(i));
  }
  return json{{"points", pts}, {"masses", ms}};
}

DiscreteMeasure measure_from_json(const json& j) {
  const auto pts = vertices_from(j, "points");
  if (!j.contains("masses") || !j.at("masses").is_array() || j.at("masses").size() != pts.size()) {
    throw std::invalid_argument("json: measure needs 'masses' matching 'points'");
  }
  std::vector<double> masses;
  for (const json& m : j.at("masses")) masses.push_back(m.get<double>());
  return DiscreteMeasure(pts, masses);
}

json to_json(const ConvexPolygon& p) {
  return json{{"kind", "polyhedral"}, {"vertices", vertices_json(p.vertices())}};
}

ConvexPolygon polygon_from_json(const json& j) {
  return ConvexPolygon(vertices_from(j, "vertices"));
}

json to_json(const ConvexBody& K) {
  if (const auto* d = std::get_if<Disk>(&K)) {
    return json{{"kind", "disk"}, {"radius", d->radius}};
  }
  return to_json(std::get<ConvexPolygon>(K));
}

ConvexBody body_from_json(const json& j) {
  const std::string kind = kind_of(j);
  if (kind == "disk") return Disk{number_at(j, "radius")};
  if (kind == "polyhedral" || kind == "polygon") return polygon_from_json(j);
  throw std::invalid_argument("json: unknown body kind '" + kind + "'");
}

json to_json(const NormSpec& norm) {
  if (norm.is_euclidean()) return json{{"kind", "euclidean"}};
  return json{{"kind", "polyhedral"}, {"vertices", vertices_json(norm.ball().vertices())}};
}

NormSpec norm_from_json(const json& j) {
  const std::string kind = kind_of(j);
  if (kind == "euclidean") return NormSpec::euclidean();
  if (kind == "polyhedral") return NormSpec::polyhedral(polygon_from_json(j));
  throw std::invalid_argument("json: unknown norm kind '" + kind + "'");
}

namespace {

json scalar_h_to_json(const ScalarH& h) {
  if (h.kind == ScalarH::Kind::kShiftedSquarePlus) {
    return json{{"kind", "shifted_square_plus"}};
  }
  return json{{"power", h.exponent}};
}

ScalarH scalar_h_from_json(const json& j) {
  if (j.is_object() && j.contains("power")) return ScalarH::power(number_at(j, "power"));
  if (kind_of(j) == "shifted_square_plus") return ScalarH::shifted_square_plus();
  throw std::invalid_argument("json: h must be {\"power\":p} or {\"kind\":\"shifted_square_plus\"}");
}

}  // namespace

json to_json(const CostSpec& c) {
  if (const auto* hn = std::get_if<HNormCost>(&c)) {
    return json{{"kind", "h_norm"}, {"h", scalar_h_to_json(hn->h)}, {"norm", to_json(hn->norm)}};
  }
  if (const auto* cq = std::get_if<ConstrainedQuadraticCost>(&c)) {
    return json{{"kind", "constrained_quadratic"}, {"K", to_json(cq->K)}};
  }
  const auto& ov = std::get<ConstrainedOneVarCost>(c);
  return json{{"kind", "constrained_onevar"},
              {"power", ov.exponent},
              {"frame", json::array({to_json(ov.frame.e1), to_json(ov.frame.e2)})},
              {"K", to_json(ov.K)}};
}

CostSpec cost_from_json(const json& j) {
  const std::string kind = kind_of(j);
  if (kind == "h_norm") {
    if (!j.contains("h") || !j.contains("norm")) {
      throw std::invalid_argument("json: h_norm needs 'h' and 'norm'");
    }
    return HNormCost{scalar_h_from_json(j.at("h")), norm_from_json(j.at("norm"))};
  }
  if (kind == "constrained_quadratic") {
    if (!j.contains("K")) throw std::invalid_argument("json: constrained_quadratic needs 'K'");
    return ConstrainedQuadraticCost{body_from_json(j.at("K"))};
  }
  if (kind == "constrained_onevar") {
    if (!j.contains("frame") || !j.at("frame").is_array() || j.at("frame").size() != 2) {
      throw std::invalid_argument("json: constrained_onevar needs 'frame' = [e1, e2]");
    }
    if (!j.contains("K")) throw std::invalid_argument("json: constrained_onevar needs 'K'");
    const Frame frame{vec2_from_json(j.at("frame")[0]), vec2_from_json(j.at("frame")[1])};
    return ConstrainedOneVarCost(number_at(j, "power"), frame, polygon_from_json(j.at("K")));
  }
  throw std::invalid_argument("json: unknown cost kind '" + kind + "'");
}

json to_json(const TransportPlan& plan) {
  json entries = json::array();
  for (const PlanEntry& e : plan.entries) {
    entries.push_back(json::array({e.i, e.j, e.mass}));
  }
  return json{{"entries", entries}};
}

TransportPlan plan_from_json(const json& j) {
  if (!j.contains("entries") || !j.at("entries").is_array()) {
    throw std::invalid_argument("json: plan needs an 'entries' array");
  }
  TransportPlan plan;
  for (const json& e : j.at("entries")) {
    if (!e.is_array() || e.size() != 3) {
      throw std::invalid_argument("json: plan entry must be [i, j, mass]");
    }
    plan.entries.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
  }
  return plan;
}

json to_json(const DualPotentials& pots) {
  return json{{"phi", pots.phi}, {"psi", pots.psi}};
}

DualPotentials potentials_from_json(const json& j) {
  DualPotentials p;
  if (!j.contains("phi") || !j.contains("psi")) {
    throw std::invalid_argument("json: potentials need 'phi' and 'psi'");
  }
  p.phi = j.at("phi").get<std::vector<double>>();
  p.psi = j.at("psi").get<std::vector<double>>();
  return p;
}

json to_json(const DualityReport& r) {
  return json{{"duality_gap", r.duality_gap},
              {"dual_value", r.dual_value},
              {"infeasible_support_entries", r.infeasible_support_entries},
              {"marginal_error", r.marginal_error},
              {"max_slack_on_support", r.max_slack_on_support},
              {"max_violation", r.max_violation},
              {"passed", r.passed},
              {"primal_value", r.primal_value}};
}

json to_json(const FaceDecomposition& d) {
  json per_face = json::object();
  for (const auto& [id, subplan] : d.per_face) {
    per_face[std::to_string(id)] = to_json(subplan);
  }
  return json{{"ambiguous", to_json(d.ambiguous)},
              {"ambiguous_sources", d.ambiguous_sources},
              {"face_kind", d.face_kind == FaceKind::kDiskFace ? "disk" : "cone"},
              {"per_face", per_face},
              {"rigid", to_json(d.rigid)}};
}

json to_json(const DecompositionStats& s) {
  json per_face = json::object();
  for (const auto& [id, mass] : s.mass_per_face) per_face[std::to_string(id)] = mass;
  return json{{"ambiguous_mass", s.ambiguous_mass},
              {"mass_per_face", per_face},
              {"n_faces_used", s.n_faces_used},
              {"n_rigid", s.n_rigid},
              {"rigid_mass", s.rigid_mass}};
}

json to_json(const RebuildReport& r) {
  return json{{"ambiguous_mass", r.ambiguous_mass},
              {"constraint_violations", r.constraint_violations},
              {"cost_after", r.cost_after},
              {"cost_before", r.cost_before},
              {"new_plan", to_json(r.new_plan)},
              {"rearranged_blocks", r.rearranged_blocks},
              {"split_atoms", r.split_atoms}};
}

json to_json(const MapCheckReport& r) {
  return json{{"checked", r.checked},
              {"infeasible_entries", r.infeasible_entries},
              {"is_map", r.is_map},
              {"max_residual", r.max_residual},
              {"median_residual", r.median_residual},
              {"multi_target_sources", r.multi_target_sources},
              {"pass", r.pass},
              {"skipped", r.skipped}};
}

std::string dump(const json& j, int indent) { return j.dump(indent); }

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

DiscreteMeasure measure_from_csv(std::istream& in, const std::string& origin) {
  std::string line;
  int line_no = 0;
  std::vector<Vec2> points;
  std::vector<double> masses;

  auto fail = [&](const std::string& what) {
    throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": " + what);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "x1,x2,mass") fail("expected header \"x1,x2,mass\"");
      continue;
    }
    std::istringstream row(line);
    std::string cell;
    double vals[3];
    for (int k = 0; k < 3; ++k) {
      if (!std::getline(row, cell, ',')) fail("expected 3 comma-separated values");
      try {
        std::size_t used = 0;
        vals[k] = std::stod(cell, &used);
        while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
        if (used != cell.size()) fail("trailing characters in \"" + cell + "\"");
      } catch (const std::exception&) {
        fail("not a number: \"" + cell + "\"");
      }
    }
    if (std::getline(row, cell, ',')) fail("expected 3 comma-separated values");
    points.push_back(Vec2{vals[0], vals[1]});
    masses.push_back(vals[2]);
  }
  if (line_no == 0) throw std::runtime_error(origin + ": empty file");
  return DiscreteMeasure(points, masses);
}

DiscreteMeasure measure_from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return measure_from_csv(in, path);
}

void measure_to_csv(const DiscreteMeasure& mu, std::ostream& out) {
  out << "x1,x2,mass\n";
  // json() formatting keeps the doubles round-trip exact
  for (int i = 0; i < mu.size(); ++i) {
    out << json(mu.point(i).x1).dump() << ',' << json(mu.point(i).x2).dump() << ','
        << json(mu.mass(i)).dump() << '\n';
  }
}

void measure_to_csv_file(const DiscreteMeasure& mu, const std::string& path) {
  std::ostringstream out;
  measure_to_csv(mu, out);
  write_text_file(path, out.str());
}

DiscreteMeasure measure_from_file(const std::string& path) {
  const auto dot_pos = path.find_last_of('.');
  const std::string ext = dot_pos == std::string::npos ? "" : path.substr(dot_pos);
  if (ext == ".json") return measure_from_json(load_json_file(path));
  return measure_from_csv_file(path);
}

json to_json(const SolutionFile& s) {
  return json{{"cost", to_json(s.cost)},
              {"mu", to_json(s.mu)},
              {"nu", to_json(s.nu)},
              {"plan", to_json(s.plan)},
              {"potentials", to_json(s.potentials)},
              {"value", s.value}};
}

SolutionFile solution_from_json(const json& j) {
  for (const char* key : {"mu", "nu", "cost", "plan", "potentials", "value"}) {
    if (!j.contains(key)) {
      throw std::invalid_argument(std::string("json: solution needs '") + key + "'");
    }
  }
  SolutionFile s{measure_from_json(j.at("mu")),  measure_from_json(j.at("nu")),
                 cost_from_json(j.at("cost")),   plan_from_json(j.at("plan")),
                 potentials_from_json(j.at("potentials")), j.at("value").get<double>()};
  return s;
}

}  // namespace ot2d::io

#include "ot2d/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <set>

#include "ot2d/errors.hpp"

namespace ot2d {

namespace {

const char* mass_mode_name(MassMode m) { return m == MassMode::kEqual ? "equal" : "random"; }

MassMode mass_mode_from(const std::string& s) {
  if (s == "equal") return MassMode::kEqual;
  if (s == "random") return MassMode::kRandom;
  throw std::invalid_argument("config: mass_mode must be \"equal\" or \"random\"");
}

}  // namespace

io::json config_to_json(const InstanceConfig& cfg) {
  io::json j{{"seed", cfg.seed},
             {"n", cfg.n},
             {"m", cfg.m},
             {"mass_mode", mass_mode_name(cfg.mass_mode)},
             {"domain", cfg.domain},
             {"threads", cfg.threads},
             {"tol",
              {{"geometric", cfg.tol.geometric},
               {"lp", cfg.tol.lp},
               {"coord_tol_factor", cfg.tol.coord_tol_factor},
               {"zero_mass", cfg.tol.zero_mass}}}};
  if (cfg.cost) j["cost"] = io::to_json(*cfg.cost);
  return j;
}

InstanceConfig config_from_json(const io::json& j) {
  InstanceConfig cfg;
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("n")) cfg.n = j.at("n").get<int>();
  if (j.contains("m")) cfg.m = j.at("m").get<int>();
  if (j.contains("mass_mode")) cfg.mass_mode = mass_mode_from(j.at("mass_mode").get<std::string>());
  if (j.contains("domain")) {
    const auto d = j.at("domain").get<std::vector<double>>();
    if (d.size() != 4) throw std::invalid_argument("config: domain must be [x1lo,x1hi,x2lo,x2hi]");
    std::copy(d.begin(), d.end(), cfg.domain.begin());
  }
  if (j.contains("cost")) cfg.cost = io::cost_from_json(j.at("cost"));
  if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
  if (j.contains("tol")) {
    const io::json& t = j.at("tol");
    if (t.contains("geometric")) cfg.tol.geometric = t.at("geometric").get<double>();
    if (t.contains("lp")) cfg.tol.lp = t.at("lp").get<double>();
    if (t.contains("coord_tol_factor")) {
      cfg.tol.coord_tol_factor = t.at("coord_tol_factor").get<double>();
    }
    if (t.contains("zero_mass")) cfg.tol.zero_mass = t.at("zero_mass").get<double>();
  }
  if (cfg.n < 1 || cfg.m < 1) throw std::invalid_argument("config: n and m must be >= 1");
  if (!(cfg.domain[0] < cfg.domain[1]) || !(cfg.domain[2] < cfg.domain[3])) {
    throw std::invalid_argument("config: degenerate domain box");
  }
  return cfg;
}

namespace {

std::vector<Vec2> draw_points(SeededRng& rng, int n, const std::array<double, 4>& box) {
  std::set<std::pair<double, double>> seen;
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(n));
  while (static_cast<int>(pts.size()) < n) {
    const double x1 = rng.uniform(box[0], box[1]);
    const double x2 = rng.uniform(box[2], box[3]);
    if (!seen.insert({x1, x2}).second) continue;  // exact duplicate: redraw
    pts.push_back(Vec2{x1, x2});
  }
  return pts;
}

std::vector<double> draw_masses(SeededRng& rng, int n, MassMode mode) {
  std::vector<double> m(static_cast<std::size_t>(n));
  if (mode == MassMode::kEqual) {
    double acc = 0.0;
    for (int i = 0; i + 1 < n; ++i) {
      m[static_cast<std::size_t>(i)] = 1.0 / n;
      acc += 1.0 / n;
    }
    m[static_cast<std::size_t>(n - 1)] = 1.0 - acc;  // total is exactly 1
    return m;
  }
  double total = 0.0;
  for (double& v : m) {
    v = 0.5 + rng.next_double();  // bounded away from zero
    total += v;
  }
  double acc = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    m[static_cast<std::size_t>(i)] /= total;
    acc += m[static_cast<std::size_t>(i)];
  }
  m[static_cast<std::size_t>(n - 1)] = 1.0 - acc;
  return m;
}

}  // namespace

std::pair<DiscreteMeasure, DiscreteMeasure> generate_instance(const InstanceConfig& cfg) {
  SeededRng rng(cfg.seed);
  const auto mu_pts = draw_points(rng, cfg.n, cfg.domain);
  const auto mu_m = draw_masses(rng, cfg.n, cfg.mass_mode);
  const auto nu_pts = draw_points(rng, cfg.m, cfg.domain);
  const auto nu_m = draw_masses(rng, cfg.m, cfg.mass_mode);
  return {DiscreteMeasure(mu_pts, mu_m), DiscreteMeasure(nu_pts, nu_m)};
}

PipelineResult run_pipeline(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                            const CostSpec& cost, const ToleranceConfig& tol, int threads) {
  const auto t0 = std::chrono::steady_clock::now();
  PipelineResult r;

  SolverOptions sopts;
  sopts.tol = tol.lp;
  sopts.zero_mass_tol = tol.zero_mass;
  sopts.threads = threads;
  r.solution = solve_kantorovich(mu, nu, cost, sopts);
  r.duality = verify_duality(r.solution.plan, r.solution.potentials, mu, nu, cost, tol.lp);
  r.final_plan = r.solution.plan;

  bool ok = r.duality.passed;
  r.strictly_convex_route = is_strictly_convex_cost(cost);

  if (std::holds_alternative<ConstrainedQuadraticCost>(cost)) {
    // strictly convex constrained: certify and check the projection-map shape
    r.map_check = constrained_map_check(r.solution.plan, r.solution.potentials, mu, nu, cost,
                                        tol.geometric, GradientOptions{});
    ok = ok && r.map_check->pass;
  } else if (!r.strictly_convex_route) {
    RebuildOptions ropts;
    ropts.tol = tol.geometric;
    ropts.coord_tol_factor = tol.coord_tol_factor;
    ropts.solver = sopts;

    if (std::holds_alternative<HNormCost>(cost)) {
      r.decomposition = decompose(r.solution.plan, mu, nu, cost, tol.geometric);
      r.decomposition_stats = decomposition_stats(*r.decomposition);
      r.rebuild = rebuild_plan(r.solution.plan, &*r.decomposition, mu, nu, cost, ropts);
    } else {
      r.rebuild = rebuild_plan(r.solution.plan, nullptr, mu, nu, cost, ropts);
    }
    r.final_plan = r.rebuild->new_plan;
    r.duality_after_rebuild =
        verify_duality(r.final_plan, r.solution.potentials, mu, nu, cost, tol.lp);
    ok = ok && r.rebuild->cost_preserved(tol.lp) && r.rebuild->constraint_violations == 0 &&
         r.duality_after_rebuild->passed;
  }

  r.pass = ok;
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

PipelineResult run_pipeline(const InstanceConfig& cfg) {
  if (!cfg.cost) throw std::invalid_argument("pipeline: config has no cost");
  const auto [mu, nu] = generate_instance(cfg);
  return run_pipeline(mu, nu, *cfg.cost, cfg.tol, cfg.threads);
}

io::json pipeline_result_to_json(const PipelineResult& r, const DiscreteMeasure& mu,
                                 const DiscreteMeasure& nu, const CostSpec& cost) {
  io::json j{{"cost", io::to_json(cost)},
             {"mu", io::to_json(mu)},
             {"nu", io::to_json(nu)},
             {"lp_value", r.solution.value},
             {"plan", io::to_json(r.solution.plan)},
             {"potentials", io::to_json(r.solution.potentials)},
             {"duality", io::to_json(r.duality)},
             {"final_plan", io::to_json(r.final_plan)},
             {"strictly_convex_route", r.strictly_convex_route},
             {"pass", r.pass}};
  if (r.decomposition_stats) j["decomposition"] = io::to_json(*r.decomposition_stats);
  if (r.rebuild) j["rebuild"] = io::to_json(*r.rebuild);
  if (r.duality_after_rebuild) j["duality_after_rebuild"] = io::to_json(*r.duality_after_rebuild);
  if (r.map_check) j["map_check"] = io::to_json(*r.map_check);
  return j;
}

}  // namespace ot2d

#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ot2d/errors.hpp"
#include "ot2d/pipeline.hpp"
#include "ot2d/svg.hpp"

namespace {

using ot2d::io::json;

ot2d::CostSpec parse_cost(const std::string& arg) {
  // a literal starts with '{'; anything else is a file path
  const auto first = arg.find_first_not_of(" \t");
  if (first != std::string::npos && arg[first] == '{') {
    return ot2d::io::cost_from_json(json::parse(arg));
  }
  return ot2d::io::cost_from_json(ot2d::io::load_json_file(arg));
}

struct Args {
  std::string mu_path, nu_path, cost_arg, config_path;
  std::string json_out, svg_out, solution_path;
  std::string out_mu, out_nu;
  std::string mass_mode = "equal";
  std::vector<double> domain;
  double tol = 1e-9;
  std::uint64_t seed = 0;
  int n = 10, m = 10, threads = 1;
};

void add_common(CLI::App* cmd, Args& a) {
  cmd->add_option("--tol", a.tol, "Geometric and certificate tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--config", a.config_path, "JSON config file; its fields override flags");
}

void add_instance_flags(CLI::App* cmd, Args& a) {
  cmd->add_option("--seed", a.seed, "RNG seed");
  cmd->add_option("--n", a.n, "Number of source atoms")->check(CLI::PositiveNumber);
  cmd->add_option("--m", a.m, "Number of target atoms")->check(CLI::PositiveNumber);
  cmd->add_option("--mass-mode", a.mass_mode, "equal | random")
      ->check(CLI::IsMember({"equal", "random"}));
  cmd->add_option("--domain", a.domain, "Bounding box x1lo x1hi x2lo x2hi")->expected(4);
}

ot2d::InstanceConfig build_config(const Args& a, bool need_cost) {
  ot2d::InstanceConfig cfg;
  cfg.seed = a.seed;
  cfg.n = a.n;
  cfg.m = a.m;
  cfg.mass_mode = a.mass_mode == "random" ? ot2d::MassMode::kRandom : ot2d::MassMode::kEqual;
  if (a.domain.size() == 4) std::copy(a.domain.begin(), a.domain.end(), cfg.domain.begin());
  if (!a.cost_arg.empty()) cfg.cost = parse_cost(a.cost_arg);
  cfg.tol.geometric = a.tol;
  cfg.tol.lp = a.tol;
  cfg.threads = a.threads;
  if (!a.config_path.empty()) {
    json merged = ot2d::config_to_json(cfg);
    merged.update(ot2d::io::load_json_file(a.config_path));
    cfg = ot2d::config_from_json(merged);
  }
  if (need_cost && !cfg.cost) {
    throw CLI::ValidationError("--cost", "a cost is required (flag or config file)");
  }
  return cfg;
}

ot2d::io::SolutionFile load_solution(const std::string& path) {
  return ot2d::io::solution_from_json(ot2d::io::load_json_file(path));
}

void maybe_write_svg(const Args& a, const ot2d::DiscreteMeasure& mu,
                     const ot2d::DiscreteMeasure& nu, const ot2d::TransportPlan& plan,
                     const ot2d::CostSpec& cost, const ot2d::FaceDecomposition* decomp) {
  if (!a.svg_out.empty()) ot2d::svg::render_plan_to_file(a.svg_out, mu, nu, plan, cost, decomp);
}

std::string pass_word(bool ok) { return ok ? "PASS" : "FAIL"; }

int cmd_gen(const Args& a) {
  const auto cfg = build_config(a, false);
  const auto [mu, nu] = ot2d::generate_instance(cfg);
  ot2d::io::measure_to_csv_file(mu, a.out_mu);
  ot2d::io::measure_to_csv_file(nu, a.out_nu);
  std::cout << "gen: wrote " << mu.size() << " source atoms to " << a.out_mu << " and "
            << nu.size() << " target atoms to " << a.out_nu << "\n";
  return 0;
}

int cmd_solve(const Args& a) {
  const auto cfg = build_config(a, true);
  const auto mu = ot2d::io::measure_from_file(a.mu_path);
  const auto nu = ot2d::io::measure_from_file(a.nu_path);
  ot2d::SolverOptions opts;
  opts.tol = cfg.tol.lp;
  opts.threads = cfg.threads;
  const auto sol = ot2d::solve_kantorovich(mu, nu, *cfg.cost, opts);
  const auto rep = ot2d::verify_duality(sol.plan, sol.potentials, mu, nu, *cfg.cost, cfg.tol.lp);
  std::cout << "solve: value=" << json(sol.value).dump() << " entries=" << sol.plan.entries.size()
            << " gap=" << rep.duality_gap << " certificate=" << pass_word(rep.passed) << "\n";
  if (!a.json_out.empty()) {
    const ot2d::io::SolutionFile out{mu, nu, *cfg.cost, sol.plan, sol.potentials, sol.value};
    ot2d::io::write_text_file(a.json_out, ot2d::io::dump(ot2d::io::to_json(out)) + "\n");
  }
  maybe_write_svg(a, mu, nu, sol.plan, *cfg.cost, nullptr);
  return rep.passed ? 0 : 1;
}

int cmd_decompose(const Args& a) {
  const auto s = load_solution(a.solution_path);
  const auto d = ot2d::decompose(s.plan, s.mu, s.nu, s.cost, a.tol);
  const auto st = ot2d::decomposition_stats(d);
  std::cout << "decompose: rigid=" << st.n_rigid << " faces_used=" << st.n_faces_used
            << " rigid_mass=" << st.rigid_mass << " ambiguous_mass=" << st.ambiguous_mass << "\n";
  if (!a.json_out.empty()) {
    ot2d::io::write_text_file(a.json_out, ot2d::io::dump(ot2d::io::to_json(d)) + "\n");
  }
  maybe_write_svg(a, s.mu, s.nu, s.plan, s.cost, &d);
  return 0;
}

int cmd_rebuild(const Args& a) {
  const auto s = load_solution(a.solution_path);
  ot2d::RebuildOptions opts;
  opts.tol = a.tol;
  const auto rep = ot2d::rebuild_plan(s.plan, nullptr, s.mu, s.nu, s.cost, opts);
  const auto dual =
      ot2d::verify_duality(rep.new_plan, s.potentials, s.mu, s.nu, s.cost, a.tol);
  const bool ok = rep.cost_preserved(a.tol) && rep.constraint_violations == 0 && dual.passed;
  std::cout << "rebuild: cost_before=" << rep.cost_before << " cost_after=" << rep.cost_after
            << " split_atoms=" << rep.split_atoms << " violations=" << rep.constraint_violations
            << " blocks=" << rep.rearranged_blocks << " " << pass_word(ok) << "\n";
  if (!a.json_out.empty()) {
    ot2d::io::write_text_file(a.json_out, ot2d::io::dump(ot2d::io::to_json(rep)) + "\n");
  }
  maybe_write_svg(a, s.mu, s.nu, rep.new_plan, s.cost, nullptr);
  return ok ? 0 : 1;
}

int cmd_verify(const Args& a) {
  const auto s = load_solution(a.solution_path);
  const auto rep = ot2d::verify_duality(s.plan, s.potentials, s.mu, s.nu, s.cost, a.tol);
  std::cout << "verify: violation=" << rep.max_violation << " slack=" << rep.max_slack_on_support
            << " marginal=" << rep.marginal_error << " gap=" << rep.duality_gap << " "
            << pass_word(rep.passed) << "\n";
  return rep.passed ? 0 : 1;
}

int cmd_oracle(const Args& a) {
  const auto cfg = build_config(a, true);
  const auto mu = ot2d::io::measure_from_file(a.mu_path);
  const auto nu = ot2d::io::measure_from_file(a.nu_path);
  const double reference = ot2d::brute_force_value(mu, nu, *cfg.cost);
  ot2d::SolverOptions opts;
  opts.tol = cfg.tol.lp;
  const auto sol = ot2d::solve_kantorovich(mu, nu, *cfg.cost, opts);
  const double err = std::fabs(sol.value - reference);
  const bool ok = err <= a.tol * (1.0 + std::fabs(reference));
  std::cout << "oracle: reference=" << json(reference).dump() << " solver="
            << json(sol.value).dump() << " err=" << err << " " << pass_word(ok) << "\n";
  return ok ? 0 : 1;
}

int cmd_pipeline(const Args& a) {
  const auto cfg = build_config(a, true);
  if (a.mu_path.empty() != a.nu_path.empty()) {
    throw CLI::ValidationError("--mu/--nu", "give both measures or neither");
  }
  const bool from_files = !a.mu_path.empty();
  const auto [gen_mu, gen_nu] = from_files
                                    ? std::pair{ot2d::io::measure_from_file(a.mu_path),
                                                ot2d::io::measure_from_file(a.nu_path)}
                                    : ot2d::generate_instance(cfg);
  const ot2d::DiscreteMeasure& mu = gen_mu;
  const ot2d::DiscreteMeasure& nu = gen_nu;
  const auto r = ot2d::run_pipeline(mu, nu, *cfg.cost, cfg.tol, cfg.threads);

  std::cout << "pipeline: value=" << json(r.solution.value).dump()
            << " certificate=" << pass_word(r.duality.passed);
  if (r.decomposition_stats) {
    std::cout << " rigid=" << r.decomposition_stats->n_rigid
              << " faces=" << r.decomposition_stats->n_faces_used
              << " ambiguous_mass=" << r.decomposition_stats->ambiguous_mass;
  }
  if (r.rebuild) {
    std::cout << " split_atoms=" << r.rebuild->split_atoms
              << " violations=" << r.rebuild->constraint_violations;
  }
  if (r.map_check) {
    std::cout << " map=" << (r.map_check->is_map ? "yes" : "no")
              << " median_residual=" << r.map_check->median_residual;
  }
  std::cout << " wall=" << r.wall_seconds << "s " << pass_word(r.pass) << "\n";

  if (!a.json_out.empty()) {
    ot2d::io::write_text_file(a.json_out,
                              ot2d::io::dump(pipeline_result_to_json(r, mu, nu, *cfg.cost)) + "\n");
  }
  maybe_write_svg(a, mu, nu, r.final_plan, *cfg.cost,
                  r.decomposition ? &*r.decomposition : nullptr);
  return r.pass ? 0 : 1;
}

int cmd_plot(const Args& a) {
  const auto s = load_solution(a.solution_path);
  const ot2d::FaceDecomposition* decomp = nullptr;
  ot2d::FaceDecomposition local;
  if (!ot2d::is_strictly_convex_cost(s.cost)) {
    local = ot2d::decompose(s.plan, s.mu, s.nu, s.cost, a.tol);
    decomp = &local;
  }
  ot2d::svg::render_plan_to_file(a.svg_out, s.mu, s.nu, s.plan, s.cost, decomp);
  std::cout << "plot: wrote " << a.svg_out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D discrete optimal transport with face decomposition and map rebuilding"};
  app.require_subcommand(1);
  Args a;
  int rc = 0;

  auto* gen = app.add_subcommand("gen", "Generate a seeded random instance as CSV");
  add_common(gen, a);
  add_instance_flags(gen, a);
  gen->add_option("--out-mu", a.out_mu, "Output CSV for the source measure")->required();
  gen->add_option("--out-nu", a.out_nu, "Output CSV for the target measure")->required();
  gen->callback([&] { rc = cmd_gen(a); });

  auto* solve = app.add_subcommand("solve", "Solve one instance and certify the result");
  add_common(solve, a);
  solve->add_option("--mu", a.mu_path, "Source measure (.csv or .json)")->required();
  solve->add_option("--nu", a.nu_path, "Target measure (.csv or .json)")->required();
  solve->add_option("--cost", a.cost_arg, "Cost spec: JSON literal or file");
  solve->add_option("--threads", a.threads, "Cost assembly threads")->check(CLI::PositiveNumber);
  solve->add_option("--json", a.json_out, "Write the solution bundle here");
  solve->add_option("--svg", a.svg_out, "Render the plan here");
  solve->callback([&] { rc = cmd_solve(a); });

  auto* dec = app.add_subcommand("decompose", "Split a solved plan by cost faces");
  add_common(dec, a);
  dec->add_option("--solution", a.solution_path, "Solution bundle from `solve --json`")
      ->required();
  dec->add_option("--json", a.json_out, "Write the decomposition here");
  dec->add_option("--svg", a.svg_out, "Render the plan colored by face");
  dec->callback([&] { rc = cmd_decompose(a); });

  auto* reb = app.add_subcommand("rebuild", "Rearrange a solved plan toward a map");
  add_common(reb, a);
  reb->add_option("--solution", a.solution_path, "Solution bundle from `solve --json`")
      ->required();
  reb->add_option("--json", a.json_out, "Write the rebuild report here");
  reb->add_option("--svg", a.svg_out, "Render the rebuilt plan");
  reb->callback([&] { rc = cmd_rebuild(a); });

  auto* ver = app.add_subcommand("verify", "Re-check the duality certificate of a solution");
  add_common(ver, a);
  ver->add_option("--solution", a.solution_path, "Solution bundle from `solve --json`")
      ->required();
  ver->callback([&] { rc = cmd_verify(a); });

  auto* ora = app.add_subcommand("oracle", "Compare the solver against brute-force enumeration");
  add_common(ora, a);
  ora->add_option("--mu", a.mu_path, "Source measure (.csv or .json)")->required();
  ora->add_option("--nu", a.nu_path, "Target measure (.csv or .json)")->required();
  ora->add_option("--cost", a.cost_arg, "Cost spec: JSON literal or file");
  ora->callback([&] { rc = cmd_oracle(a); });

  auto* pipe = app.add_subcommand("pipeline", "Generate or load, solve, decompose, rebuild, verify");
  add_common(pipe, a);
  add_instance_flags(pipe, a);
  pipe->add_option("--mu", a.mu_path, "Use this source measure instead of generating");
  pipe->add_option("--nu", a.nu_path, "Use this target measure instead of generating");
  pipe->add_option("--cost", a.cost_arg, "Cost spec: JSON literal or file");
  pipe->add_option("--threads", a.threads, "Cost assembly threads")->check(CLI::PositiveNumber);
  pipe->add_option("--json", a.json_out, "Write the full pipeline result here");
  pipe->add_option("--svg", a.svg_out, "Render the final plan here");
  pipe->callback([&] { rc = cmd_pipeline(a); });

  auto* plot = app.add_subcommand("plot", "Render a solved instance as SVG");
  add_common(plot, a);
  plot->add_option("--solution", a.solution_path, "Solution bundle from `solve --json`")
      ->required();
  plot->add_option("--svg", a.svg_out, "Output SVG path")->required();
  plot->callback([&] { rc = cmd_plot(a); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ot2d::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    if (e.has_witness) {
      std::cerr << "  stranded source atoms:";
      for (std::size_t k = 0; k < e.witness.sources.size() && k < 12; ++k) {
        std::cerr << ' ' << e.witness.sources[k];
      }
      if (e.witness.sources.size() > 12) std::cerr << " ...";
      std::cerr << "\n  their admissible targets carry " << e.witness.target_mass
                << " of the required " << e.witness.source_mass << "\n";
    }
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}

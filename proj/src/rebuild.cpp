#include "ot2d/rebuild.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "ot2d/errors.hpp"

namespace ot2d {

namespace {

constexpr double kMassTol = 1e-12;

/// Quantizes a list of coordinate values: sorted greedy clustering, each
/// value mapped to the first value of its cluster.
std::map<double, double> quantize(std::vector<double> values, double coord_tol) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  std::map<double, double> rep;
  double cluster_start = 0.0;
  bool open = false;
  for (double v : values) {
    if (!open || v - cluster_start > coord_tol) {
      cluster_start = v;
      open = true;
    }
    rep[v] = cluster_start;
  }
  return rep;
}

void sort_fiber(std::vector<FiberAtom>& atoms) {
  std::sort(atoms.begin(), atoms.end(), [](const FiberAtom& a, const FiberAtom& b) {
    return a.coord != b.coord ? a.coord < b.coord : a.index < b.index;
  });
}

}  // namespace

FaceFrame face_frame(const Face& face) {
  FaceFrame f;
  f.e1 = face.n;
  f.e2 = cross(face.n, face.tangent) > 0.0 ? face.tangent : -face.tangent;
  return f;
}

Interval cone_section(const Face& face, double t) {
  const FaceFrame f = face_frame(face);
  const double ca = dot(f.e2, face.a);
  const double cb = dot(f.e2, face.b);
  const double lo = std::min(ca, cb), hi = std::max(ca, cb);
  t = std::max(t, 0.0);
  return Interval{t * lo, t * hi};
}

double FiberBlock::mass() const {
  double m = 0.0;
  for (const FiberAtom& s : sources) m += s.mass;
  return m;
}

std::vector<FiberBlock> build_fiber_blocks(const TransportPlan& subplan,
                                           const DiscreteMeasure& mu,
                                           const DiscreteMeasure& nu, int face_id,
                                           const FaceFrame& frame, double coord_tol) {
  // first frame coordinate of every atom the subplan touches
  std::vector<double> src_first, tgt_first;
  for (const PlanEntry& e : subplan.entries) {
    src_first.push_back(dot(frame.e1, mu.point(e.i)));
    tgt_first.push_back(dot(frame.e1, nu.point(e.j)));
  }
  const auto src_rep = quantize(src_first, coord_tol);
  const auto tgt_rep = quantize(tgt_first, coord_tol);

  struct Accum {
    std::map<int, double> src_mass, tgt_mass;
  };
  std::map<std::pair<double, double>, Accum> groups;
  for (const PlanEntry& e : subplan.entries) {
    const double a = src_rep.at(dot(frame.e1, mu.point(e.i)));
    const double b = tgt_rep.at(dot(frame.e1, nu.point(e.j)));
    Accum& g = groups[{a, b}];
    g.src_mass[e.i] += e.mass;
    g.tgt_mass[e.j] += e.mass;
  }

  std::vector<FiberBlock> blocks;
  blocks.reserve(groups.size());
  for (const auto& [key, acc] : groups) {
    FiberBlock b;
    b.face_id = face_id;
    b.a = key.first;
    b.b = key.second;
    double sm = 0.0, tm = 0.0;
    for (const auto& [i, m] : acc.src_mass) {
      b.sources.push_back({i, dot(frame.e2, mu.point(i)), m});
      sm += m;
    }
    for (const auto& [j, m] : acc.tgt_mass) {
      b.targets.push_back({j, dot(frame.e2, nu.point(j)), m});
      tm += m;
    }
    if (std::fabs(sm - tm) > kMassTol) {
      throw MassImbalanceError("build_fiber_blocks: block sides disagree");
    }
    sort_fiber(b.sources);
    sort_fiber(b.targets);
    blocks.push_back(std::move(b));
  }
  return blocks;
}

std::vector<PlanEntry> monotone_rearrange(const FiberBlock& block,
                                          const std::optional<Interval>& section,
                                          double tol, int* violations,
                                          double zero_mass_tol) {
  std::vector<PlanEntry> out;
  std::size_t si = 0, ti = 0;
  double rs = block.sources.empty() ? 0.0 : block.sources[0].mass;
  double rt = block.targets.empty() ? 0.0 : block.targets[0].mass;
  double section_eps = tol;
  if (section) {
    section_eps = tol * std::max({1.0, std::fabs(section->lo), std::fabs(section->hi)});
  }

  while (si < block.sources.size() && ti < block.targets.size()) {
    const double alloc = std::min(rs, rt);
    if (alloc > zero_mass_tol) {
      const FiberAtom& s = block.sources[si];
      const FiberAtom& t = block.targets[ti];
      out.push_back({s.index, t.index, alloc});
      if (violations) {
        const double delta = s.coord - t.coord;
        if (!section || !section->contains(delta, section_eps)) ++*violations;
      }
    }
    rs -= alloc;
    rt -= alloc;
    if (rs <= zero_mass_tol) {
      if (++si < block.sources.size()) rs = block.sources[si].mass;
    }
    if (rt <= zero_mass_tol) {
      if (++ti < block.targets.size()) rt = block.targets[ti].mass;
    }
  }

  // leftover beyond the junk threshold means the block was unbalanced
  double leftover = si < block.sources.size() ? rs : 0.0;
  for (std::size_t k = si + 1; k < block.sources.size(); ++k) leftover += block.sources[k].mass;
  double t_leftover = ti < block.targets.size() ? rt : 0.0;
  for (std::size_t k = ti + 1; k < block.targets.size(); ++k) t_leftover += block.targets[k].mass;
  if (leftover > kMassTol || t_leftover > kMassTol) {
    throw MassImbalanceError("monotone_rearrange: block mass did not sweep out");
  }
  return out;
}

bool RebuildReport::cost_preserved(double tol) const {
  if (!std::isfinite(cost_before) || !std::isfinite(cost_after)) return false;
  return std::fabs(cost_after - cost_before) <= tol * (1.0 + std::fabs(cost_before));
}

namespace {

void append_entries(TransportPlan& into, const std::vector<PlanEntry>& entries) {
  into.entries.insert(into.entries.end(), entries.begin(), entries.end());
}

void coalesce_sorted(TransportPlan& plan) {
  plan.sort_entries();
  std::vector<PlanEntry> merged;
  merged.reserve(plan.entries.size());
  for (const PlanEntry& e : plan.entries) {
    if (!merged.empty() && merged.back().i == e.i && merged.back().j == e.j) {
      merged.back().mass += e.mass;
    } else {
      merged.push_back(e);
    }
  }
  plan.entries = std::move(merged);
}

double ext_to_double(ExtReal v) {
  return v.is_finite() ? v.value() : std::numeric_limits<double>::infinity();
}

}  // namespace

RebuildReport rebuild_plan(const TransportPlan& plan, const FaceDecomposition* decomp,
                           const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                           const CostSpec& c, const RebuildOptions& opts) {
  RebuildReport report;
  report.cost_before = ext_to_double(plan_cost(plan, mu, nu, c, opts.tol));

  const double coord_tol = opts.coord_tol_factor * std::max(1.0, joint_diameter(mu, nu));

  if (const auto* ov = std::get_if<ConstrainedOneVarCost>(&c)) {
    // the whole plan lives on one flat family: sections of K at fixed first
    // frame coordinate; rearrange every fiber block monotonically
    const FaceFrame frame{ov->frame.e1, ov->frame.e2};
    const auto blocks = build_fiber_blocks(plan, mu, nu, 0, frame, coord_tol);
    for (const FiberBlock& b : blocks) {
      const auto section = ov->K.section(b.a - b.b, ov->frame.e1, ov->frame.e2, opts.tol);
      append_entries(report.new_plan,
                     monotone_rearrange(b, section, opts.tol, &report.constraint_violations,
                                        opts.solver.zero_mass_tol));
      ++report.rearranged_blocks;
    }
  } else if (is_strictly_convex_cost(c)) {
    report.new_plan = plan;  // already as rigid as it gets
  } else {
    // polyhedral cone faces or the flat unit disk
    const auto& hn = std::get<HNormCost>(c);
    FaceDecomposition local;
    if (decomp == nullptr) {
      local = decompose(plan, mu, nu, c, opts.tol);
      decomp = &local;
    }
    report.ambiguous_mass = decomp->ambiguous.total_mass();
    report.new_plan = decomp->rigid;
    append_entries(report.new_plan, decomp->ambiguous.entries);

    for (const auto& [face_id, subplan] : decomp->per_face) {
      if (decomp->face_kind == FaceKind::kDiskFace) {
        const auto& [sub_mu, sub_nu] = decomp->sub_marginals.at(face_id);
        const TransportPlan picked =
            secondary_selection(sub_mu, sub_nu, mu, nu, ConvexBody{Disk{1.0}}, opts.solver);
        append_entries(report.new_plan, picked.entries);
        ++report.rearranged_blocks;
        continue;
      }
      const Face& face = hn.norm.faces().at(static_cast<std::size_t>(face_id));
      const FaceFrame frame = face_frame(face);
      const auto blocks = build_fiber_blocks(subplan, mu, nu, face_id, frame, coord_tol);
      for (const FiberBlock& b : blocks) {
        const Interval section = cone_section(face, b.a - b.b);
        append_entries(report.new_plan,
                       monotone_rearrange(b, section, opts.tol, &report.constraint_violations,
                                          opts.solver.zero_mass_tol));
        ++report.rearranged_blocks;
      }
    }
  }

  coalesce_sorted(report.new_plan);
  report.cost_after = ext_to_double(plan_cost(report.new_plan, mu, nu, c, opts.tol));
  if (!std::isfinite(report.cost_after)) ++report.constraint_violations;
  report.split_atoms = count_split_sources(report.new_plan);
  return report;
}

// ---------------------------------------------------------------------------

MinimizerSet constrained_minimizer(Vec2 l, const CostSpec& c) {
  if (const auto* cq = std::get_if<ConstrainedQuadraticCost>(&c)) {
    // argmin over K of |z|^2/2 - <l, z>  =  proj_K(l)
    return MinimizerSet{project_onto(cq->K, l), std::nullopt};
  }
  const auto* ov = std::get_if<ConstrainedOneVarCost>(&c);
  if (ov == nullptr) {
    throw NotApplicableError("constrained_minimizer: cost has no constraint body");
  }

  const double p = ov->exponent;
  const double l1 = dot(l, ov->frame.e1);
  const double l2 = dot(l, ov->frame.e2);

  // breakpoints of the piecewise-linear section bounds: vertex coordinates
  std::vector<double> ts;
  for (const Vec2& v : ov->K.vertices()) ts.push_back(dot(ov->frame.e1, v));
  std::sort(ts.begin(), ts.end());
  const double tscale = std::max(1.0, std::fabs(ts.front()) + std::fabs(ts.back()));
  ts.erase(std::unique(ts.begin(), ts.end(),
                       [&](double a, double b) { return std::fabs(a - b) <= 1e-12 * tscale; }),
           ts.end());

  auto section_at = [&](double t) {
    auto s = ov->K.section(t, ov->frame.e1, ov->frame.e2);
    if (!s) {
      // clamped inside the vertex range this only happens by rounding
      const double mid = std::clamp(t, ts.front(), ts.back());
      s = ov->K.section(mid, ov->frame.e1, ov->frame.e2);
      if (!s) throw std::logic_error("constrained_minimizer: empty interior section");
    }
    return *s;
  };
  auto hpow = [&](double t) { return p == 2.0 ? t * t : std::pow(std::fabs(t), p); };
  auto best_z2 = [&](const Interval& s) { return l2 > 0.0 ? s.hi : (l2 < 0.0 ? s.lo : s.lo); };
  auto objective = [&](double t) {
    const Interval s = section_at(t);
    return hpow(t) - l1 * t - l2 * best_z2(s);
  };

  double best_t = ts.front();
  double best_val = objective(best_t);
  auto consider = [&](double t) {
    const double v = objective(t);
    if (v < best_val - 0.0) {
      best_val = v;
      best_t = t;
    }
  };

  for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
    const double t0 = ts[k], t1 = ts[k + 1];
    consider(t1);
    // slope of the active bound on (t0, t1): the bound is affine there
    const Interval s0 = section_at(t0), s1 = section_at(t1);
    const double bound0 = best_z2(s0), bound1 = best_z2(s1);
    const double slope = (bound1 - bound0) / (t1 - t0);
    const double r = l1 + l2 * slope;
    // stationary point of |t|^p - r t:  p |t|^(p-1) sign(t) = r
    const double mag = std::pow(std::fabs(r) / p, 1.0 / (p - 1.0));
    const double tstar = r >= 0.0 ? mag : -mag;
    if (tstar > t0 && tstar < t1) consider(tstar);
  }

  const Interval sec = section_at(best_t);
  if (l2 == 0.0 && sec.length() > 1e-12 * tscale) {
    const Vec2 zlo = ov->frame.e1 * best_t + ov->frame.e2 * sec.lo;
    const Vec2 zhi = ov->frame.e1 * best_t + ov->frame.e2 * sec.hi;
    return MinimizerSet{zlo, std::make_pair(zlo, zhi)};
  }
  const Vec2 z = ov->frame.e1 * best_t + ov->frame.e2 * best_z2(sec);
  return MinimizerSet{z, std::nullopt};
}

// ---------------------------------------------------------------------------

namespace {

std::vector<int> gradient_neighbors(const std::vector<Vec2>& points, int i,
                                    const GradientOptions& opts) {
  std::vector<std::pair<double, int>> by_dist;
  for (int k = 0; k < static_cast<int>(points.size()); ++k) {
    if (k == i) continue;
    const double d2 = norm_sq(points[k] - points[i]);
    if (opts.radius > 0.0 && d2 > opts.radius * opts.radius) continue;
    by_dist.emplace_back(d2, k);
  }
  std::sort(by_dist.begin(), by_dist.end());
  std::vector<int> out;
  const std::size_t cap =
      opts.radius > 0.0 ? by_dist.size() : std::min<std::size_t>(by_dist.size(), opts.k_nearest);
  out.reserve(cap);
  for (std::size_t k = 0; k < cap; ++k) out.push_back(by_dist[k].second);
  return out;
}

}  // namespace

std::optional<Vec2> least_squares_gradient(const std::vector<Vec2>& points,
                                           const std::vector<double>& phi, int i,
                                           const GradientOptions& opts) {
  const std::vector<int> nbrs = gradient_neighbors(points, i, opts);
  if (nbrs.size() < 2) return std::nullopt;

  // normal equations of the affine fit phi(x) ~ phi(x_i) + <g, x - x_i>
  double a11 = 0.0, a12 = 0.0, a22 = 0.0, b1 = 0.0, b2 = 0.0;
  double scale2 = 0.0;
  for (int k : nbrs) {
    const Vec2 dx = points[k] - points[i];
    const double dv = phi[k] - phi[i];
    a11 += dx.x1 * dx.x1;
    a12 += dx.x1 * dx.x2;
    a22 += dx.x2 * dx.x2;
    b1 += dx.x1 * dv;
    b2 += dx.x2 * dv;
    scale2 = std::max(scale2, norm_sq(dx));
  }
  const double det = a11 * a22 - a12 * a12;
  if (std::fabs(det) <= 1e-12 * scale2 * scale2) return std::nullopt;  // collinear stencil
  return Vec2{(a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det};
}

MapCheckReport constrained_map_check(const TransportPlan& plan, const DualPotentials& pots,
                                     const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                     const CostSpec& c, double tol,
                                     const GradientOptions& gopts) {
  const auto* cq = std::get_if<ConstrainedQuadraticCost>(&c);
  if (cq == nullptr) {
    throw NotApplicableError("constrained_map_check: needs the constrained quadratic cost");
  }

  MapCheckReport r;
  r.multi_target_sources = count_split_sources(plan);
  r.is_map = r.multi_target_sources == 0;

  TransportPlan sorted = plan;
  sorted.sort_entries();
  for (const PlanEntry& e : sorted.entries) {
    if (!cost_eval(c, mu.point(e.i) - nu.point(e.j), tol).is_finite()) ++r.infeasible_entries;
  }

  // one representative target per source: the heaviest entry (ties: lowest j)
  std::map<int, PlanEntry> rep;
  for (const PlanEntry& e : sorted.entries) {
    auto [it, fresh] = rep.try_emplace(e.i, e);
    if (!fresh && e.mass > it->second.mass) it->second = e;
  }

  for (const auto& [i, e] : rep) {
    const auto grad = least_squares_gradient(mu.points(), pots.phi, i, gopts);
    if (!grad) {
      ++r.skipped;
      continue;
    }
    const Vec2 mapped = mu.point(i) - project_onto(cq->K, *grad);
    r.residuals.push_back(norm(nu.point(e.j) - mapped));
    ++r.checked;
  }

  if (!r.residuals.empty()) {
    std::vector<double> s = r.residuals;
    std::sort(s.begin(), s.end());
    r.max_residual = s.back();
    r.median_residual = s[s.size() / 2];
  }
  r.pass = r.is_map && r.infeasible_entries == 0;
  return r;
}

// ---------------------------------------------------------------------------

TransportPlan secondary_selection(const SubMarginal& mu_part, const SubMarginal& nu_part,
                                  const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                  const ConvexBody& K, const SolverOptions& opts) {
  if (mu_part.indices.empty() || nu_part.indices.empty()) {
    throw std::invalid_argument("secondary_selection: empty sub-marginal");
  }
  if (std::fabs(mu_part.total - nu_part.total) > kMassTol) {
    throw MassImbalanceError("secondary_selection: sub-marginals do not balance");
  }

  const CostSpec sub_cost = ConstrainedQuadraticCost{K};
  const int n = static_cast<int>(mu_part.indices.size());
  const int m = static_cast<int>(nu_part.indices.size());
  CostMatrix mat(n, m);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < m; ++b) {
      const Vec2 z = mu.point(mu_part.indices[a]) - nu.point(nu_part.indices[b]);
      mat.set(a, b, cost_eval(sub_cost, z, opts.tol));
    }
  }
  const SolveResult sub = solve_transport(mu_part.masses, nu_part.masses, mat, opts);

  TransportPlan out;
  out.entries.reserve(sub.plan.entries.size());
  for (const PlanEntry& e : sub.plan.entries) {
    out.entries.push_back({mu_part.indices[e.i], nu_part.indices[e.j], e.mass});
  }
  out.sort_entries();
  return out;
}

TransportPlan secondary_selection(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                  const ConvexBody& K, const SolverOptions& opts) {
  SubMarginal mp, np;
  for (int i = 0; i < mu.size(); ++i) {
    mp.indices.push_back(i);
    mp.masses.push_back(mu.mass(i));
    mp.total += mu.mass(i);
  }
  for (int j = 0; j < nu.size(); ++j) {
    np.indices.push_back(j);
    np.masses.push_back(nu.mass(j));
    np.total += nu.mass(j);
  }
  return secondary_selection(mp, np, mu, nu, K, opts);
}

}  // namespace ot2d

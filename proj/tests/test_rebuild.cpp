#include <doctest.h>

#include <cmath>
#include <map>

#include "ot2d/errors.hpp"
#include "ot2d/pipeline.hpp"
#include "ot2d/rebuild.hpp"

using namespace ot2d;

namespace {

ConvexPolygon square_ball() {
  return ConvexPolygon({{1.0, 1.0}, {-1.0, 1.0}, {-1.0, -1.0}, {1.0, -1.0}});
}

CostSpec square_p2() {
  return HNormCost(ScalarH::power(2.0), NormSpec::polyhedral(square_ball()));
}

const Face& face_towards(const NormSpec& norm, Vec2 dir) {
  const auto f = norm.face_of_direction(dir);
  REQUIRE(f.has_value());
  return norm.faces()[*f];
}

}  // namespace

TEST_CASE("face frames are right-handed with the support functional first") {
  const NormSpec ns = NormSpec::polyhedral(square_ball());

  const FaceFrame right = face_frame(face_towards(ns, {1.0, 0.0}));
  CHECK(norm(right.e1 - Vec2{1.0, 0.0}) == doctest::Approx(0.0));
  CHECK(norm(right.e2 - Vec2{0.0, 1.0}) == doctest::Approx(0.0));

  const FaceFrame left = face_frame(face_towards(ns, {-1.0, 0.0}));
  CHECK(norm(left.e1 - Vec2{-1.0, 0.0}) == doctest::Approx(0.0));
  CHECK(norm(left.e2 - Vec2{0.0, -1.0}) == doctest::Approx(0.0));

  for (const Face& f : ns.faces()) {
    const FaceFrame fr = face_frame(f);
    CHECK(cross(fr.e1, fr.e2) > 0.0);
    CHECK(std::fabs(dot(fr.e1, fr.e2)) <= 1e-12);
  }
}

TEST_CASE("cone sections scale linearly with the gauge coordinate") {
  const NormSpec ns = NormSpec::polyhedral(square_ball());
  const Face& right = face_towards(ns, {1.0, 0.0});

  const Interval at2 = cone_section(right, 2.0);
  CHECK(at2.lo == doctest::Approx(-2.0));
  CHECK(at2.hi == doctest::Approx(2.0));

  const Interval at0 = cone_section(right, 0.0);
  CHECK(at0.lo == doctest::Approx(0.0));
  CHECK(at0.hi == doctest::Approx(0.0));

  // cone membership equals section membership in face coordinates
  SeededRng rng(88);
  for (int it = 0; it < 200; ++it) {
    const Vec2 z{rng.uniform(0.0, 3.0), rng.uniform(-3.5, 3.5)};
    if (norm(z) < 1e-9) continue;
    const FaceFrame fr = face_frame(right);
    const double t = dot(fr.e1, z), s = dot(fr.e2, z);
    const bool in_cone = t >= 0.0 && cone_section(right, t).contains(s, 1e-12);
    const auto assigned = ns.face_of_direction(z);
    if (assigned.has_value() && *assigned == right.id) CHECK(in_cone);
    if (!in_cone && t > 1e-9) CHECK((!assigned.has_value() || *assigned != right.id));
  }
}

TEST_CASE("fiber blocks group by quantized coordinates") {
  // one source at the origin, two targets on the fiber x1 = -1 of the left
  // face frame (e1 = (-1, 0)): a single block with both targets
  const DiscreteMeasure mu({{0.0, 0.0}}, {1.0});
  const DiscreteMeasure nu({{1.0, 0.3}, {1.0, -0.2}}, {0.5, 0.5});
  TransportPlan sub;
  sub.entries = {{0, 0, 0.5}, {0, 1, 0.5}};

  const NormSpec ns = NormSpec::polyhedral(square_ball());
  const Face& left = face_towards(ns, {-1.0, 0.0});
  const FaceFrame fr = face_frame(left);

  const auto blocks = build_fiber_blocks(sub, mu, nu, left.id, fr, 1e-9);
  REQUIRE(blocks.size() == 1);
  CHECK(blocks[0].a == doctest::Approx(0.0));
  CHECK(blocks[0].b == doctest::Approx(-1.0));
  CHECK(blocks[0].sources.size() == 1);
  REQUIRE(blocks[0].targets.size() == 2);
  CHECK(blocks[0].mass() == doctest::Approx(1.0));
  // targets sorted by second coordinate; left frame has e2 = (0, -1)
  CHECK(blocks[0].targets[0].index == 0);
  CHECK(blocks[0].targets[1].index == 1);
  CHECK(blocks[0].targets[0].coord < blocks[0].targets[1].coord);

  // distinct fibers split into distinct blocks
  const DiscreteMeasure nu2({{1.0, 0.3}, {2.0, -0.2}}, {0.5, 0.5});
  const auto blocks2 = build_fiber_blocks(sub, mu, nu2, left.id, fr, 1e-9);
  CHECK(blocks2.size() == 2);

  // near-identical coordinates merge under a generous quantum
  const DiscreteMeasure nu3({{1.0, 0.3}, {1.0 + 1e-12, -0.2}}, {0.5, 0.5});
  const auto blocks3 = build_fiber_blocks(sub, mu, nu3, left.id, fr, 1e-9);
  CHECK(blocks3.size() == 1);
}

TEST_CASE("monotone rearrangement pairs mass in coordinate order") {
  FiberBlock b;
  b.sources = {{0, 0.0, 0.5}, {1, 1.0, 0.5}};
  b.targets = {{0, 0.2, 0.3}, {1, 0.8, 0.7}};
  int violations = 0;
  const auto entries = monotone_rearrange(b, Interval{-10.0, 10.0}, 1e-9, &violations);
  REQUIRE(entries.size() == 3);
  CHECK(entries[0] == PlanEntry{0, 0, 0.3});
  CHECK(entries[1].i == 0);
  CHECK(entries[1].j == 1);
  CHECK(entries[1].mass == doctest::Approx(0.2));
  CHECK(entries[2].i == 1);
  CHECK(entries[2].j == 1);
  CHECK(entries[2].mass == doctest::Approx(0.5));
  CHECK(violations == 0);

  // an unbalanced block is rejected
  FiberBlock bad = b;
  bad.targets[1].mass = 0.4;
  CHECK_THROWS_AS(monotone_rearrange(bad, std::nullopt, 1e-9, nullptr), MassImbalanceError);
}

TEST_CASE("monotone rearrangement stays feasible whenever some coupling is") {
  // build blocks from a random feasible coupling, then check the monotone
  // one never leaves the allowed displacement interval
  SeededRng rng(1813);
  for (int it = 0; it < 250; ++it) {
    const double lo = rng.uniform(-1.0, 0.5);
    const double hi = lo + rng.uniform(0.0, 1.5);
    const int pairs = 1 + static_cast<int>(rng.next_double() * 6.0);

    // atoms on a coarse lattice so coordinates collide and masses merge
    std::map<double, double> src, tgt;
    for (int k = 0; k < pairs; ++k) {
      const double t = std::round(rng.uniform(-8.0, 8.0)) / 4.0;
      const double delta = rng.uniform(lo, hi);
      const double m = 0.1 + rng.next_double();
      tgt[t] += m;
      src[t + delta] += m;
    }
    FiberBlock b;
    int id = 0;
    for (const auto& [coord, m] : src) b.sources.push_back({id++, coord, m});
    id = 0;
    for (const auto& [coord, m] : tgt) b.targets.push_back({id++, coord, m});

    int violations = 0;
    const auto entries = monotone_rearrange(b, Interval{lo, hi}, 1e-9, &violations);
    CHECK(violations == 0);

    // marginals: every atom's mass is fully swept
    std::map<int, double> got_src, got_tgt;
    for (const PlanEntry& e : entries) {
      got_src[e.i] += e.mass;
      got_tgt[e.j] += e.mass;
    }
    for (const FiberAtom& s : b.sources) {
      CHECK(std::fabs(got_src[s.index] - s.mass) <= 1e-9);
    }
    for (const FiberAtom& t : b.targets) {
      CHECK(std::fabs(got_tgt[t.index] - t.mass) <= 1e-9);
    }
  }
}

TEST_CASE("rebuild converts a face-split plan into a monotone one") {
  // two sources and two targets on parallel fibers of the left face; start
  // from the maximally split plan and expect the permutation back
  const DiscreteMeasure mu({{0.0, 0.0}, {0.0, 1.0}}, {0.5, 0.5});
  const DiscreteMeasure nu({{2.0, 0.3}, {2.0, 0.7}}, {0.5, 0.5});
  TransportPlan plan;
  plan.entries = {{0, 0, 0.25}, {0, 1, 0.25}, {1, 0, 0.25}, {1, 1, 0.25}};

  const auto rep = rebuild_plan(plan, nullptr, mu, nu, square_p2());
  CHECK(rep.split_atoms == 0);
  CHECK(rep.constraint_violations == 0);
  CHECK(rep.cost_preserved(1e-9));
  CHECK(rep.rearranged_blocks >= 1);
  REQUIRE(rep.new_plan.entries.size() == 2);
  // monotone in the face coordinate keeps the vertical order: x2=0 goes to
  // the target at x2=0.3, x2=1 to the one at x2=0.7
  CHECK(rep.new_plan.entries[0] == PlanEntry{0, 0, 0.5});
  CHECK(rep.new_plan.entries[1] == PlanEntry{1, 1, 0.5});
  CHECK(marginal_error(rep.new_plan, mu, nu) <= 1e-12);
}

TEST_CASE("rebuild leaves strictly convex plans untouched") {
  const DiscreteMeasure mu({{0.0, 0.0}, {1.0, 0.0}}, {0.5, 0.5});
  const DiscreteMeasure nu({{0.2, 0.1}, {0.8, -0.1}}, {0.5, 0.5});
  const CostSpec c = HNormCost(ScalarH::power(2.0), NormSpec::euclidean());
  const auto sol = solve_kantorovich(mu, nu, c);
  const auto rep = rebuild_plan(sol.plan, nullptr, mu, nu, c);
  CHECK(rep.new_plan.entries == sol.plan.entries);
  CHECK(rep.cost_preserved(1e-12));
}

TEST_CASE("rebuild handles the one-variable constrained family") {
  // all mass moves one unit along e1; the second coordinate is free within
  // K = [0,2] x [-1,1] sections
  const ConvexPolygon K({{0.0, -1.0}, {2.0, -1.0}, {2.0, 1.0}, {0.0, 1.0}});
  const CostSpec c = ConstrainedOneVarCost(2.0, Frame{}, K);
  const DiscreteMeasure mu({{1.0, 0.0}, {1.0, 1.0}}, {0.5, 0.5});
  const DiscreteMeasure nu({{0.0, 0.4}, {0.0, 0.9}}, {0.5, 0.5});
  TransportPlan plan;
  plan.entries = {{0, 0, 0.25}, {0, 1, 0.25}, {1, 0, 0.25}, {1, 1, 0.25}};

  const auto rep = rebuild_plan(plan, nullptr, mu, nu, c);
  CHECK(rep.split_atoms == 0);
  CHECK(rep.constraint_violations == 0);
  CHECK(rep.cost_preserved(1e-9));
  REQUIRE(rep.new_plan.entries.size() == 2);
  CHECK(rep.new_plan.entries[0] == PlanEntry{0, 0, 0.5});
  CHECK(rep.new_plan.entries[1] == PlanEntry{1, 1, 0.5});
}

TEST_CASE("rebuild along the full pipeline preserves optimality") {
  SeededRng rng(4457);
  for (int it = 0; it < 10; ++it) {
    InstanceConfig cfg;
    cfg.seed = 900 + it;
    cfg.n = 18 + it;
    cfg.m = 12 + 2 * it;
    cfg.mass_mode = MassMode::kRandom;
    const auto [mu, nu] = generate_instance(cfg);
    const CostSpec c = square_p2();
    const auto sol = solve_kantorovich(mu, nu, c);
    const auto d = decompose(sol.plan, mu, nu, c, 1e-9);
    const auto rep = rebuild_plan(sol.plan, &d, mu, nu, c);
    CHECK(rep.constraint_violations == 0);
    CHECK(rep.cost_preserved(1e-9));
    CHECK(marginal_error(rep.new_plan, mu, nu) <= 1e-11);
    const auto dual = verify_duality(rep.new_plan, sol.potentials, mu, nu, c, 1e-9);
    CHECK(dual.passed);
  }
}

TEST_CASE("constrained minimizers: quadratic projection") {
  const CostSpec disk_quad = ConstrainedQuadraticCost{ConvexBody{Disk(1.0)}};
  const auto m1 = constrained_minimizer({3.0, 0.0}, disk_quad);
  CHECK_FALSE(m1.is_segment());
  CHECK(norm(m1.point - Vec2{1.0, 0.0}) == doctest::Approx(0.0));

  const CostSpec sq_quad = ConstrainedQuadraticCost{ConvexBody{square_ball()}};
  const auto m2 = constrained_minimizer({2.0, 0.5}, sq_quad);
  CHECK(norm(m2.point - Vec2{1.0, 0.5}) == doctest::Approx(0.0));

  // variational inequality at the returned point
  SeededRng rng(31);
  const ConvexPolygon sq = square_ball();
  for (int it = 0; it < 100; ++it) {
    const Vec2 l{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
    const auto m = constrained_minimizer(l, sq_quad);
    for (const Vec2& k : sq.vertices()) {
      CHECK(dot(l - m.point, k - m.point) <= 1e-12 * (1.0 + norm(l)));
    }
  }

  CHECK_THROWS_AS(constrained_minimizer({1.0, 0.0}, square_p2()), NotApplicableError);
}

TEST_CASE("constrained minimizers: one-variable family") {
  const ConvexPolygon K({{0.0, -1.0}, {2.0, -1.0}, {2.0, 1.0}, {0.0, 1.0}});
  const CostSpec c = ConstrainedOneVarCost(2.0, Frame{}, K);

  // l pointing straight up: first coordinate settles at its stationary
  // point 0, the free coordinate climbs to the top of the section
  const auto up = constrained_minimizer({0.0, 1.0}, c);
  CHECK_FALSE(up.is_segment());
  CHECK(norm(up.point - Vec2{0.0, 1.0}) == doctest::Approx(0.0));

  // no pull in the free coordinate: the whole section is minimizing
  const auto flat = constrained_minimizer({1.0, 0.0}, c);
  REQUIRE(flat.is_segment());
  CHECK(flat.segment->first.x1 == doctest::Approx(0.5));
  CHECK(flat.segment->second.x1 == doctest::Approx(0.5));
  CHECK(flat.segment->first.x2 == doctest::Approx(-1.0));
  CHECK(flat.segment->second.x2 == doctest::Approx(1.0));

  // exhaustive grid cross-check of the reported minimum value
  SeededRng rng(99);
  for (int it = 0; it < 50; ++it) {
    const Vec2 l{rng.uniform(-4.0, 4.0), rng.uniform(-4.0, 4.0)};
    const auto m = constrained_minimizer(l, c);
    const double got = std::pow(std::fabs(m.point.x1), 2.0) - dot(l, m.point);
    double best = std::numeric_limits<double>::infinity();
    for (double t = 0.0; t <= 2.0 + 1e-12; t += 0.005) {
      for (double s = -1.0; s <= 1.0 + 1e-12; s += 0.005) {
        best = std::min(best, t * t - l.x1 * t - l.x2 * s);
      }
    }
    CHECK(got <= best + 1e-4);
    CHECK(K.contains(m.point, 1e-9));
  }
}

TEST_CASE("least squares gradient recovers affine data exactly") {
  std::vector<Vec2> pts;
  std::vector<double> phi;
  const Vec2 g{0.7, -1.3};
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      pts.push_back({0.1 * i, 0.1 * j});
      phi.push_back(dot(g, pts.back()) + 2.0);
    }
  }
  GradientOptions opts;
  opts.k_nearest = 8;
  const auto est = least_squares_gradient(pts, phi, 12, opts);  // interior atom
  REQUIRE(est.has_value());
  CHECK(est->x1 == doctest::Approx(0.7));
  CHECK(est->x2 == doctest::Approx(-1.3));

  GradientOptions radial;
  radial.radius = 0.15;
  const auto est2 = least_squares_gradient(pts, phi, 12, radial);
  REQUIRE(est2.has_value());
  CHECK(est2->x1 == doctest::Approx(0.7));

  // collinear stencil cannot determine a plane
  std::vector<Vec2> line;
  std::vector<double> vals;
  for (int i = 0; i < 5; ++i) {
    line.push_back({0.1 * i, 0.0});
    vals.push_back(0.1 * i);
  }
  CHECK_FALSE(least_squares_gradient(line, vals, 2, opts).has_value());
}

TEST_CASE("constrained map check against the projection formula") {
  InstanceConfig cfg;
  cfg.seed = 314;
  cfg.n = cfg.m = 16;
  const auto [mu, nu] = generate_instance(cfg);
  const CostSpec c = ConstrainedQuadraticCost{ConvexBody{square_ball()}};
  const auto sol = solve_kantorovich(mu, nu, c);
  const auto rep = constrained_map_check(sol.plan, sol.potentials, mu, nu, c, 1e-9);
  CHECK(rep.is_map);
  CHECK(rep.infeasible_entries == 0);
  CHECK(rep.pass);
  CHECK(rep.checked + rep.skipped == 16);

  CHECK_THROWS_AS(constrained_map_check(sol.plan, sol.potentials, mu, nu, square_p2(), 1e-9),
                  NotApplicableError);
}

TEST_CASE("secondary selection picks the straight pairing") {
  const DiscreteMeasure mu({{0.0, 0.0}, {0.0, 1.0}}, {0.5, 0.5});
  const DiscreteMeasure nu({{0.5, 0.2}, {0.5, 0.9}}, {0.5, 0.5});
  // both pairings feasible in the unit disk; the quadratic total
  // 0.5*(0.145) + 0.5*(0.13) of the straight pairing beats the crossed one
  const auto plan = secondary_selection(mu, nu, ConvexBody{Disk(1.0)});
  REQUIRE(plan.entries.size() == 2);
  CHECK(plan.entries[0] == PlanEntry{0, 0, 0.5});
  CHECK(plan.entries[1] == PlanEntry{1, 1, 0.5});
  CHECK(is_permutation_plan(plan, 2, 2));
}

TEST_CASE("secondary selection remaps sub-marginal indices to the parent") {
  // parent indices {1, 3} vs {0, 2}: the result must speak parent language
  const DiscreteMeasure mu({{9.0, 9.0}, {0.0, 0.0}, {9.0, 9.0 + 1.0}, {0.0, 1.0}},
                           {0.1, 0.4, 0.1, 0.4});
  const DiscreteMeasure nu({{0.5, 0.2}, {8.0, 8.0}, {0.5, 0.9}}, {0.4, 0.2, 0.4});
  SubMarginal mp{{1, 3}, {0.4, 0.4}, 0.8};
  SubMarginal np{{0, 2}, {0.4, 0.4}, 0.8};
  const auto plan = secondary_selection(mp, np, mu, nu, ConvexBody{Disk(1.0)});
  REQUIRE(plan.entries.size() == 2);
  CHECK(plan.entries[0] == PlanEntry{1, 0, 0.4});
  CHECK(plan.entries[1] == PlanEntry{3, 2, 0.4});

  SubMarginal bad{{1}, {0.3}, 0.3};
  CHECK_THROWS_AS(secondary_selection(bad, np, mu, nu, ConvexBody{Disk(1.0)}),
                  MassImbalanceError);
}

TEST_CASE("rebuild routes disk faces through the secondary selection") {
  // split atoms whose displacements all stay inside the unit disk: after the
  // rebuild the subplan must be re-coupled by the quadratic rule
  const CostSpec ssp = HNormCost(ScalarH::shifted_square_plus(), NormSpec::euclidean());
  const DiscreteMeasure mu({{0.0, 0.0}, {0.0, 1.0}}, {0.5, 0.5});
  const DiscreteMeasure nu({{0.3, 0.2}, {0.3, 0.8}}, {0.5, 0.5});
  TransportPlan plan;
  plan.entries = {{0, 0, 0.25}, {0, 1, 0.25}, {1, 0, 0.25}, {1, 1, 0.25}};
  const auto rep = rebuild_plan(plan, nullptr, mu, nu, ssp);
  CHECK(rep.split_atoms == 0);
  CHECK(rep.cost_preserved(1e-12));
  CHECK(rep.cost_after == doctest::Approx(0.0));
  REQUIRE(rep.new_plan.entries.size() == 2);
  CHECK(rep.new_plan.entries[0] == PlanEntry{0, 0, 0.5});
  CHECK(rep.new_plan.entries[1] == PlanEntry{1, 1, 0.5});
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <tuple>

#include "ot2d/decompose.hpp"
#include "ot2d/errors.hpp"
#include "ot2d/pipeline.hpp"

using namespace ot2d;

namespace {

ConvexPolygon square_ball() {
  return ConvexPolygon({{1.0, 1.0}, {-1.0, 1.0}, {-1.0, -1.0}, {1.0, -1.0}});
}

CostSpec square_p2() {
  return HNormCost(ScalarH::power(2.0), NormSpec::polyhedral(square_ball()));
}

int face_towards(const NormSpec& norm, Vec2 dir) {
  const auto f = norm.face_of_direction(dir);
  REQUIRE(f.has_value());
  return *f;
}

}  // namespace

TEST_CASE("decomposition requires a flat cost") {
  const DiscreteMeasure mu({{0.0, 0.0}}, {1.0});
  const DiscreteMeasure nu({{0.5, 0.0}}, {1.0});
  TransportPlan plan;
  plan.entries = {{0, 0, 1.0}};
  CHECK_THROWS_AS(
      decompose(plan, mu, nu, HNormCost(ScalarH::power(2.0), NormSpec::euclidean()), 1e-9),
      NotApplicableError);
  CHECK_THROWS_AS(decompose(plan, mu, nu, ConstrainedQuadraticCost{ConvexBody{Disk(1.0)}}, 1e-9),
                  NotApplicableError);
  CHECK_THROWS_AS(decompose(plan, mu, nu, ConstrainedOneVarCost(2.0, Frame{}, square_ball()), 1e-9),
                  NotApplicableError);
}

TEST_CASE("single target atoms are rigid") {
  const DiscreteMeasure mu({{0.0, 0.0}, {1.0, 1.0}}, {0.5, 0.5});
  const DiscreteMeasure nu({{2.0, 0.5}, {3.0, 1.2}}, {0.5, 0.5});
  TransportPlan plan;
  plan.entries = {{0, 0, 0.5}, {1, 1, 0.5}};
  const auto d = decompose(plan, mu, nu, square_p2(), 1e-9);
  CHECK(d.rigid.entries.size() == 2);
  CHECK(d.per_face.empty());
  CHECK(d.ambiguous.entries.empty());
  const auto st = decomposition_stats(d);
  CHECK(st.n_rigid == 2);
  CHECK(st.rigid_mass == doctest::Approx(1.0));
  CHECK(st.total_mass() == doctest::Approx(1.0));
}

TEST_CASE("multi-target atom lands on the common face cone") {
  // both displacements point into the right-face cone {z : z1 >= |z2|}
  const DiscreteMeasure mu({{0.0, 0.0}}, {1.0});
  const DiscreteMeasure nu({{-2.0, 0.5}, {-3.0, -0.8}}, {0.4, 0.6});
  TransportPlan plan;
  plan.entries = {{0, 0, 0.4}, {0, 1, 0.6}};
  const auto d = decompose(plan, mu, nu, square_p2(), 1e-9);

  CHECK(d.rigid.entries.empty());
  CHECK(d.ambiguous.entries.empty());
  REQUIRE(d.per_face.size() == 1);

  const NormSpec norm = NormSpec::polyhedral(square_ball());
  const int right = face_towards(norm, {1.0, 0.0});
  REQUIRE(d.per_face.count(right) == 1);
  CHECK(d.per_face.at(right).entries.size() == 2);

  const auto& [sub_mu, sub_nu] = d.sub_marginals.at(right);
  CHECK(sub_mu.total == doctest::Approx(1.0));
  CHECK(sub_nu.total == doctest::Approx(1.0));
  CHECK(sub_mu.indices == std::vector<int>{0});
  CHECK(sub_nu.indices == std::vector<int>{0, 1});
}

TEST_CASE("a vertex-direction displacement resolves through the face intersection") {
  // one displacement along the ball vertex (1,1), the other inside the right
  // cone: the only face compatible with both is the right one
  const DiscreteMeasure mu({{0.0, 0.0}}, {1.0});
  const DiscreteMeasure nu({{-2.0, -2.0}, {-3.0, 0.0}}, {0.5, 0.5});
  TransportPlan plan;
  plan.entries = {{0, 0, 0.5}, {0, 1, 0.5}};
  const auto d = decompose(plan, mu, nu, square_p2(), 1e-9);
  CHECK(d.ambiguous.entries.empty());
  REQUIRE(d.per_face.size() == 1);
  const int right = face_towards(NormSpec::polyhedral(square_ball()), {1.0, 0.0});
  CHECK(d.per_face.count(right) == 1);
}

TEST_CASE("displacements in different cones are ambiguous") {
  // one displacement in the right cone, one in the top cone
  const DiscreteMeasure mu({{0.0, 0.0}}, {1.0});
  const DiscreteMeasure nu({{-2.0, 0.0}, {0.0, -2.0}}, {0.5, 0.5});
  TransportPlan plan;
  plan.entries = {{0, 0, 0.5}, {0, 1, 0.5}};
  const auto d = decompose(plan, mu, nu, square_p2(), 1e-9);
  CHECK(d.per_face.empty());
  CHECK(d.ambiguous.entries.size() == 2);
  CHECK(d.ambiguous_sources == std::vector<int>{0});
  CHECK(decomposition_stats(d).ambiguous_mass == doctest::Approx(1.0));
}

TEST_CASE("zero displacements never block a face assignment") {
  // the source coincides with one target; the other lies in the top cone
  const DiscreteMeasure mu({{0.0, 0.0}}, {1.0});
  const DiscreteMeasure nu({{0.0, 0.0}, {0.0, -2.0}}, {0.5, 0.5});
  TransportPlan plan;
  plan.entries = {{0, 0, 0.5}, {0, 1, 0.5}};
  const auto d = decompose(plan, mu, nu, square_p2(), 1e-9);
  REQUIRE(d.per_face.size() == 1);
  const int top = face_towards(NormSpec::polyhedral(square_ball()), {0.0, 1.0});
  CHECK(d.per_face.count(top) == 1);
}

TEST_CASE("shifted profile uses the unit disk as its single face") {
  const CostSpec ssp = HNormCost(ScalarH::shifted_square_plus(), NormSpec::euclidean());
  const DiscreteMeasure mu({{0.0, 0.0}, {4.0, 0.0}}, {0.6, 0.4});
  const DiscreteMeasure nu({{0.5, 0.1}, {0.3, -0.4}, {6.0, 0.0}}, {0.3, 0.3, 0.4});
  TransportPlan plan;
  plan.entries = {{0, 0, 0.3}, {0, 1, 0.3}, {1, 2, 0.4}};
  const auto d = decompose(plan, mu, nu, ssp, 1e-9);
  CHECK(d.face_kind == FaceKind::kDiskFace);
  REQUIRE(d.per_face.count(0) == 1);
  CHECK(d.per_face.at(0).entries.size() == 2);  // the split atom, both inside the disk
  CHECK(d.rigid.entries.size() == 1);           // the long displacement is single-target

  // a split atom with one displacement beyond the disk is ambiguous
  const DiscreteMeasure nu2({{0.5, 0.1}, {3.0, 0.0}, {6.0, 0.0}}, {0.3, 0.3, 0.4});
  const auto d2 = decompose(plan, mu, nu2, ssp, 1e-9);
  CHECK(d2.per_face.empty());
  CHECK(d2.ambiguous_sources == std::vector<int>{0});
}

TEST_CASE("per-face displacements satisfy the face equation") {
  // random unequal-mass instances: every classified displacement must solve
  // <n, z> = gauge(z) on its assigned face, and nothing may stay ambiguous
  SeededRng rng(7125);
  const NormSpec norm = NormSpec::polyhedral(square_ball());
  for (int it = 0; it < 25; ++it) {
    const int n = 6 + it % 5, m = 4 + it % 7;
    std::vector<Vec2> xs, ys;
    std::vector<double> xm, ym;
    for (int i = 0; i < n; ++i) xs.push_back({rng.next_double(), rng.next_double()});
    for (int j = 0; j < m; ++j) ys.push_back({rng.next_double(), rng.next_double()});
    double tx = 0.0, ty = 0.0;
    for (int i = 0; i < n; ++i) { xm.push_back(0.5 + rng.next_double()); tx += xm.back(); }
    for (int j = 0; j < m; ++j) { ym.push_back(0.5 + rng.next_double()); ty += ym.back(); }
    double ax = 0.0, ay = 0.0;
    for (int i = 0; i + 1 < n; ++i) { xm[i] /= tx; ax += xm[i]; }
    for (int j = 0; j + 1 < m; ++j) { ym[j] /= ty; ay += ym[j]; }
    xm.back() = 1.0 - ax;
    ym.back() = 1.0 - ay;
    const DiscreteMeasure mu(xs, xm), nu(ys, ym);

    const auto r = solve_kantorovich(mu, nu, square_p2());
    const auto d = decompose(r.plan, mu, nu, square_p2(), 1e-9);

    // the three buckets partition the plan entrywise
    std::vector<PlanEntry> all = d.rigid.entries;
    all.insert(all.end(), d.ambiguous.entries.begin(), d.ambiguous.entries.end());
    for (const auto& [face_id, sub] : d.per_face) {
      all.insert(all.end(), sub.entries.begin(), sub.entries.end());
    }
    auto key = [](const PlanEntry& a, const PlanEntry& b) {
      return std::tie(a.i, a.j) < std::tie(b.i, b.j);
    };
    std::sort(all.begin(), all.end(), key);
    std::vector<PlanEntry> orig = r.plan.entries;
    std::sort(orig.begin(), orig.end(), key);
    REQUIRE(all.size() == orig.size());
    for (std::size_t k = 0; k < all.size(); ++k) CHECK(all[k] == orig[k]);
    CHECK(decomposition_stats(d).total_mass() == doctest::Approx(1.0));

    for (const auto& [face_id, sub] : d.per_face) {
      const Face& f = norm.faces()[face_id];
      for (const PlanEntry& e : sub.entries) {
        const Vec2 z = mu.point(e.i) - nu.point(e.j);
        const double g = norm.gauge(z);
        if (g == 0.0) continue;
        CHECK(std::fabs(dot(f.n, z) - g) <= 1e-9 * g);
      }
    }
  }
}

TEST_CASE("equal-mass generic instances decompose without ambiguity") {
  SeededRng rng(40961);
  for (int it = 0; it < 25; ++it) {
    const int n = 4 + it % 5;
    std::vector<Vec2> xs, ys;
    for (int i = 0; i < n; ++i) xs.push_back({rng.next_double(), rng.next_double()});
    for (int j = 0; j < n; ++j) ys.push_back({rng.next_double(), rng.next_double()});
    const std::vector<double> w(static_cast<std::size_t>(n), 1.0 / n);
    const DiscreteMeasure mu(xs, w), nu(ys, w);
    const auto r = solve_kantorovich(mu, nu, square_p2());
    const auto d = decompose(r.plan, mu, nu, square_p2(), 1e-9);
    CHECK(decomposition_stats(d).ambiguous_mass == 0.0);
    CHECK(d.ambiguous.entries.empty());
  }
}

TEST_CASE("stats add up") {
  const DiscreteMeasure mu({{0.0, 0.0}, {1.0, 0.0}}, {0.7, 0.3});
  const DiscreteMeasure nu({{-2.0, 0.5}, {-3.0, -0.4}, {3.0, 0.2}}, {0.4, 0.3, 0.3});
  TransportPlan plan;
  plan.entries = {{0, 0, 0.4}, {0, 1, 0.3}, {1, 2, 0.3}};
  const auto d = decompose(plan, mu, nu, square_p2(), 1e-9);
  const auto st = decomposition_stats(d);
  CHECK(st.n_rigid == 1);
  CHECK(st.n_faces_used == 1);
  CHECK(st.rigid_mass == doctest::Approx(0.3));
  double face_mass = 0.0;
  for (const auto& [id, mass] : st.mass_per_face) face_mass += mass;
  CHECK(face_mass == doctest::Approx(0.7));
  CHECK(st.total_mass() == doctest::Approx(1.0));
}

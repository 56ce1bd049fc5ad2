#include "ot2d/decompose.hpp"

#include <algorithm>
#include <cmath>

#include "ot2d/errors.hpp"

namespace ot2d {

namespace {

/// Candidate face ids whose cone contains the displacement within the
/// relative tolerance: |<n_f, z> - gauge(z)| <= tol * gauge(z).
void candidate_faces(const NormSpec& norm, Vec2 z, double tol, std::vector<int>& out) {
  out.clear();
  const double g = norm.gauge(z);
  const double eps = tol * g;
  for (const Face& f : norm.faces()) {
    if (std::fabs(dot(f.n, z) - g) <= eps) out.push_back(f.id);
  }
}

void add_submarginal(SubMarginal& sm, int index, double mass) {
  if (!sm.indices.empty() && sm.indices.back() == index) {
    sm.masses.back() += mass;
  } else {
    sm.indices.push_back(index);
    sm.masses.push_back(mass);
  }
  sm.total += mass;
}

}  // namespace

FaceDecomposition decompose(const TransportPlan& plan, const DiscreteMeasure& mu,
                            const DiscreteMeasure& nu, const CostSpec& c, double tol) {
  if (is_strictly_convex_cost(c)) {
    throw NotApplicableError("decompose: cost is strictly convex, nothing to decompose");
  }
  const auto* hn = std::get_if<HNormCost>(&c);
  if (hn == nullptr) {
    throw NotApplicableError("decompose: only norm-based costs carry a face structure");
  }
  const bool disk_face = hn->h.kind == ScalarH::Kind::kShiftedSquarePlus;

  FaceDecomposition d;
  d.face_kind = disk_face ? FaceKind::kDiskFace : FaceKind::kConeFace;

  // group entries by source atom; entries are sorted so rows are contiguous
  TransportPlan sorted = plan;
  sorted.sort_entries();
  const auto& entries = sorted.entries;

  std::vector<int> cand, common;
  std::size_t row_start = 0;
  while (row_start < entries.size()) {
    std::size_t row_end = row_start;
    while (row_end < entries.size() && entries[row_end].i == entries[row_start].i) ++row_end;
    const int i = entries[row_start].i;
    const std::size_t count = row_end - row_start;

    if (count == 1) {
      d.rigid.entries.push_back(entries[row_start]);
      row_start = row_end;
      continue;
    }

    // multi-target atom: intersect the face candidates of all nonzero
    // displacements (zero displacements are compatible with every face)
    bool first = true;
    bool ambiguous = false;
    common.clear();
    int assigned_face = -1;

    if (disk_face) {
      // the flat piece is the unit ball of the Euclidean norm
      bool all_inside = true;
      for (std::size_t k = row_start; k < row_end; ++k) {
        const Vec2 z = mu.point(i) - nu.point(entries[k].j);
        if (norm(z) > 1.0 + tol) {
          all_inside = false;
          break;
        }
      }
      if (all_inside) {
        assigned_face = 0;
      } else {
        ambiguous = true;
      }
    } else {
      for (std::size_t k = row_start; k < row_end && !ambiguous; ++k) {
        const Vec2 z = mu.point(i) - nu.point(entries[k].j);
        if (norm(z) == 0.0) continue;  // cannot happen: atoms are distinct
        candidate_faces(hn->norm, z, tol, cand);
        if (first) {
          common = cand;
          first = false;
        } else {
          std::vector<int> merged;
          std::set_intersection(common.begin(), common.end(), cand.begin(), cand.end(),
                                std::back_inserter(merged));
          common = std::move(merged);
        }
        if (common.empty()) ambiguous = true;
      }
      if (!ambiguous) {
        if (common.size() == 1) {
          assigned_face = common.front();
        } else {
          ambiguous = true;  // several faces fit (vertex-ray geometry)
        }
      }
    }

    if (ambiguous) {
      d.ambiguous_sources.push_back(i);
      for (std::size_t k = row_start; k < row_end; ++k) d.ambiguous.entries.push_back(entries[k]);
    } else {
      TransportPlan& sub = d.per_face[assigned_face];
      auto& [sub_mu, sub_nu] = d.sub_marginals[assigned_face];
      for (std::size_t k = row_start; k < row_end; ++k) {
        sub.entries.push_back(entries[k]);
        add_submarginal(sub_mu, i, entries[k].mass);
      }
      (void)sub_nu;  // filled below once per face, sorted by target index
    }
    row_start = row_end;
  }

  // target-side sub-marginals, accumulated in sorted target order
  for (auto& [face, plans] : d.per_face) {
    auto& [sub_mu, sub_nu] = d.sub_marginals[face];
    (void)sub_mu;
    std::vector<PlanEntry> by_target = plans.entries;
    std::sort(by_target.begin(), by_target.end(),
              [](const PlanEntry& a, const PlanEntry& b) { return a.j < b.j; });
    for (const PlanEntry& e : by_target) add_submarginal(sub_nu, e.j, e.mass);
  }

  return d;
}

double DecompositionStats::total_mass() const {
  double t = rigid_mass + ambiguous_mass;
  for (const auto& [face, m] : mass_per_face) t += m;
  return t;
}

DecompositionStats decomposition_stats(const FaceDecomposition& d) {
  DecompositionStats s;
  s.rigid_mass = d.rigid.total_mass();
  s.ambiguous_mass = d.ambiguous.total_mass();
  s.n_faces_used = static_cast<int>(d.per_face.size());

  // rigid rows are whole source atoms by construction
  std::vector<int> rigid_rows;
  for (const PlanEntry& e : d.rigid.entries) rigid_rows.push_back(e.i);
  std::sort(rigid_rows.begin(), rigid_rows.end());
  rigid_rows.erase(std::unique(rigid_rows.begin(), rigid_rows.end()), rigid_rows.end());
  s.n_rigid = static_cast<int>(rigid_rows.size());

  for (const auto& [face, plan] : d.per_face) {
    s.mass_per_face[face] = plan.total_mass();
  }
  return s;
}

}  // namespace ot2d

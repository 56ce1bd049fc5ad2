#pragma once

#include <map>
#include <vector>

#include "ot2d/plan.hpp"
#include "ot2d/solver.hpp"

namespace ot2d {

/// Kind of flat piece the per-face subplans live on: a cone over a
/// polyhedral ball edge, or the full unit disk where a shifted profile
/// vanishes (a single two-dimensional face).
enum class FaceKind { kConeFace, kDiskFace };

/// Restriction of a measure to the atoms touched by a subplan.
struct SubMarginal {
  std::vector<int> indices;
  std::vector<double> masses;
  double total = 0.0;
};

/// Partition of an optimal plan by the face structure of the cost:
///  - rigid: single-target source atoms (kept untouchable),
///  - per_face: multi-target atoms whose displacements all lie in one face
///    cone, grouped by face id,
///  - ambiguous: multi-target atoms compatible with zero or several faces
///    (kept optimal, never split, reported).
struct FaceDecomposition {
  FaceKind face_kind = FaceKind::kConeFace;
  TransportPlan rigid;
  std::map<int, TransportPlan> per_face;
  TransportPlan ambiguous;
  std::map<int, std::pair<SubMarginal, SubMarginal>> sub_marginals;
  std::vector<int> ambiguous_sources;
};

/// Classifies every source atom of an optimal basic plan. Requires a
/// decomposable cost: HNormCost with a polyhedral norm, or the shifted
/// square profile over the Euclidean norm. Throws NotApplicableError for
/// strictly convex or one-variable constrained costs.
FaceDecomposition decompose(const TransportPlan& plan, const DiscreteMeasure& mu,
                            const DiscreteMeasure& nu, const CostSpec& c,
                            double tol = kDefaultGeomTol);

struct DecompositionStats {
  int n_rigid = 0;        // rigid source atoms
  int n_faces_used = 0;
  double rigid_mass = 0.0;
  double ambiguous_mass = 0.0;
  std::map<int, double> mass_per_face;

  double total_mass() const;
};

DecompositionStats decomposition_stats(const FaceDecomposition& d);

}  // namespace ot2d

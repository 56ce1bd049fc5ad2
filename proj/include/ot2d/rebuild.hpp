#pragma once

#include <optional>
#include <vector>

#include "ot2d/decompose.hpp"

namespace ot2d {

/// Coordinate frame attached to a face: e1 is the face's support functional
/// (so <e1, z> = gauge(z) on the face cone), e2 a unit tangent covector with
/// cross(e1, e2) > 0. Coordinates of z are (dot(e1, z), dot(e2, z)).
struct FaceFrame {
  Vec2 e1, e2;
};

FaceFrame face_frame(const Face& face);

/// Section of the face cone at first coordinate t >= 0: the interval of
/// admissible second coordinates t * [min, max] spanned by the edge.
Interval cone_section(const Face& face, double t);

struct FiberAtom {
  int index = 0;      // atom index in the parent measure
  double coord = 0.0; // second frame coordinate
  double mass = 0.0;
};

/// All subplan mass travelling between one source fiber and one target
/// fiber: atoms share (up to quantization) the first frame coordinate a on
/// the source side and b on the target side.
struct FiberBlock {
  int face_id = 0;
  double a = 0.0;
  double b = 0.0;
  std::vector<FiberAtom> sources;
  std::vector<FiberAtom> targets;

  double mass() const;
};

/// Groups a face subplan by quantized (source x1, target y1) pairs. Source
/// and target lists are sorted by second coordinate (ties by index).
/// Throws MassImbalanceError when a block's sides disagree beyond 1e-12.
std::vector<FiberBlock> build_fiber_blocks(const TransportPlan& subplan,
                                           const DiscreteMeasure& mu,
                                           const DiscreteMeasure& nu, int face_id,
                                           const FaceFrame& frame, double coord_tol);

/// Monotone (north-west corner) rearrangement of one block: sweeps both
/// sorted sides and pairs mass in order, the optimal coupling for any convex
/// cost of the coordinate difference. When `section` is given, every output
/// displacement is checked against it and violations are counted in
/// *violations (the count stays 0 whenever some feasible coupling of the
/// block exists, which holds for blocks cut from a feasible plan).
std::vector<PlanEntry> monotone_rearrange(const FiberBlock& block,
                                          const std::optional<Interval>& section,
                                          double tol, int* violations,
                                          double zero_mass_tol = 1e-13);

struct RebuildReport {
  TransportPlan new_plan;
  double cost_before = 0.0;
  double cost_after = 0.0;
  int split_atoms = 0;            // sources with several targets in new_plan
  int constraint_violations = 0;  // displacements outside their section / K
  int rearranged_blocks = 0;
  double ambiguous_mass = 0.0;

  bool cost_preserved(double tol) const;
};

struct RebuildOptions {
  double tol = kDefaultGeomTol;
  double coord_tol_factor = 1e-9;  // quantization step = factor * instance diameter
  SolverOptions solver;            // used by the secondary disk-face selection
};

/// Rewrites each per-face subplan into fiberwise monotone form (cone faces),
/// or by the secondary quadratic selection (disk face), or block-rearranges
/// the whole plan for one-variable constrained costs. Rigid and ambiguous
/// parts pass through untouched. The primary cost is preserved to float
/// accuracy by construction.
RebuildReport rebuild_plan(const TransportPlan& plan, const FaceDecomposition* decomp,
                           const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                           const CostSpec& c, const RebuildOptions& opts = {});

/// Minimizer set of h(z) - <l, z> over the constraint body of a constrained
/// cost: a single point for the quadratic family (the projection of l onto
/// K), a point or a vertical segment for the one-variable family. Throws
/// NotApplicableError for unconstrained costs.
struct MinimizerSet {
  Vec2 point;
  std::optional<std::pair<Vec2, Vec2>> segment;

  bool is_segment() const { return segment.has_value(); }
};

MinimizerSet constrained_minimizer(Vec2 l, const CostSpec& c);

/// Neighborhood strategy for gradient estimation on scattered data.
struct GradientOptions {
  int k_nearest = 8;       // used when radius <= 0
  double radius = 0.0;     // include all atoms within this distance when > 0
};

/// Least-squares affine fit of phi over the neighbors of atom i; nullopt when
/// the neighborhood is degenerate (fewer than two independent offsets).
std::optional<Vec2> least_squares_gradient(const std::vector<Vec2>& points,
                                           const std::vector<double>& phi, int i,
                                           const GradientOptions& opts);

struct MapCheckReport {
  bool is_map = false;
  int multi_target_sources = 0;
  int infeasible_entries = 0;  // displacements outside K beyond tol
  int checked = 0;             // atoms with a usable gradient estimate
  int skipped = 0;
  double max_residual = 0.0;
  double median_residual = 0.0;
  std::vector<double> residuals;  // |y_lp - (x - proj_K(grad phi))| per checked atom
  bool pass = false;              // map-ness and feasibility; residuals are metrics
};

/// Compares the plan's assignment against the projection formula
/// T(x) = x - proj_K(grad phi(x)) with a least-squares gradient estimated
/// from the discrete potential. Only meaningful for the constrained
/// quadratic family; throws NotApplicableError otherwise.
MapCheckReport constrained_map_check(const TransportPlan& plan, const DualPotentials& pots,
                                     const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                     const CostSpec& c, double tol = kDefaultGeomTol,
                                     const GradientOptions& gopts = {});

/// Optimal coupling of two sub-marginals for the secondary quadratic cost
/// restricted to K: picks the most rigid plan among the primary-optimal
/// ones on a flat piece. Entries are returned with parent-measure indices.
TransportPlan secondary_selection(const SubMarginal& mu_part, const SubMarginal& nu_part,
                                  const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                  const ConvexBody& K, const SolverOptions& opts = {});

/// Convenience overload coupling two whole measures.
TransportPlan secondary_selection(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                  const ConvexBody& K, const SolverOptions& opts = {});

}  // namespace ot2d

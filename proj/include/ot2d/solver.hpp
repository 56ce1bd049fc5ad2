#pragma once

#include <cstdint>
#include <vector>

#include "ot2d/errors.hpp"
#include "ot2d/plan.hpp"

namespace ot2d {

struct SolverOptions {
  double tol = 1e-9;             // feasibility / duality tolerance (relative)
  double zero_mass_tol = 1e-13;  // plan entries at or below this mass are dropped
  int threads = 1;               // cost-matrix assembly parallelism
};

struct SolveResult {
  TransportPlan plan;
  DualPotentials potentials;
  double value = 0.0;
};

/// Dense extended-real cost matrix; infeasible pairs are flagged rather than
/// stored as huge floats.
class CostMatrix {
 public:
  CostMatrix(int n, int m);

  int rows() const { return n_; }
  int cols() const { return m_; }
  void set(int i, int j, ExtReal v);
  bool finite(int i, int j) const { return finite_[idx(i, j)] != 0; }
  double at(int i, int j) const { return cost_[idx(i, j)]; }  // only valid when finite
  ExtReal get(int i, int j) const;

 private:
  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * m_ + j; }

  int n_, m_;
  std::vector<double> cost_;
  std::vector<std::uint8_t> finite_;
};

/// Assemble the cost matrix c(x_i - y_j); rows can be filled in parallel.
CostMatrix assemble_cost_matrix(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                const CostSpec& c, const SolverOptions& opts = {});

/// Exact primal-dual solve of the discrete Kantorovich problem by network
/// simplex on the bipartite transportation graph. Infeasible pairs are
/// excluded from the arc set; when any exist, feasibility is established
/// first by a max-flow check whose cut is reported on failure.
/// The returned plan is an optimal basic solution (forest support) with
/// potentials certifying optimality. Fully deterministic for fixed inputs,
/// independent of the thread count.
SolveResult solve_kantorovich(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                              const CostSpec& c, const SolverOptions& opts = {});

/// Same solver on raw balanced supply/demand vectors and a prebuilt matrix;
/// used for sub-problem re-solves. Supplies and demands must each sum to the
/// same total within 1e-12 (not necessarily 1).
SolveResult solve_transport(const std::vector<double>& supplies,
                            const std::vector<double>& demands, const CostMatrix& cost,
                            const SolverOptions& opts = {});

/// Reference optimum by exhaustive enumeration, for cross-checking the
/// solver on small instances.
///  - equal-mass square instances with n <= 8: all permutations;
///  - otherwise n*m <= 12: all forest supports (polytope vertices).
/// Throws TooLargeError beyond those bounds and InfeasibleError when no
/// feasible assignment exists.
double brute_force_value(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                         const CostSpec& c);

struct DualityReport {
  double max_violation = 0.0;         // max over pairs of phi_i + psi_j - c_ij
  double max_slack_on_support = 0.0;  // max over entries of |c_ij - phi_i - psi_j|
  double marginal_error = 0.0;
  double duality_gap = 0.0;           // |primal value - dual value|
  int infeasible_support_entries = 0;
  double primal_value = 0.0;
  double dual_value = 0.0;
  bool passed = false;  // pass(tol) at the tolerance verify_duality was called with

  bool pass(double tol) const;
};

/// Checks the pair (plan, potentials) as an optimality certificate:
/// dual feasibility on every admissible pair, tightness on the support,
/// marginal accuracy and a vanishing duality gap, all at relative
/// tolerance tol * (1 + |value|).
DualityReport verify_duality(const TransportPlan& plan, const DualPotentials& pots,
                             const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                             const CostSpec& c, double tol = 1e-9);

/// Largest gauge_K(x_i - y_j) over plan entries; +inf when a displacement
/// leaves every scaled copy of K. Diagnostic for constraint saturation.
double linf_gauge_value(const TransportPlan& plan, const DiscreteMeasure& mu,
                        const DiscreteMeasure& nu, const ConvexBody& K);

}  // namespace ot2d

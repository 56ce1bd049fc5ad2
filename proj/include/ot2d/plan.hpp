#pragma once

#include <vector>

#include "ot2d/cost.hpp"
#include "ot2d/measure.hpp"

namespace ot2d {

struct PlanEntry {
  int i = 0;       // source atom index
  int j = 0;       // target atom index
  double mass = 0.0;

  friend bool operator==(const PlanEntry&, const PlanEntry&) = default;
};

/// Sparse coupling between two discrete measures. Entries are kept sorted by
/// (i, j) with strictly positive masses.
struct TransportPlan {
  std::vector<PlanEntry> entries;

  double total_mass() const;
  void sort_entries();
};

/// Kantorovich potentials (phi on sources, psi on targets), normalized so
/// that phi[0] = 0.
struct DualPotentials {
  std::vector<double> phi;
  std::vector<double> psi;
};

std::vector<double> row_marginals(const TransportPlan& plan, int n);
std::vector<double> col_marginals(const TransportPlan& plan, int m);

/// Largest absolute deviation of the plan marginals from the measure masses.
double marginal_error(const TransportPlan& plan, const DiscreteMeasure& mu,
                      const DiscreteMeasure& nu);

/// Total cost sum over entries; infinite as soon as one entry is infeasible.
ExtReal plan_cost(const TransportPlan& plan, const DiscreteMeasure& mu,
                  const DiscreteMeasure& nu, const CostSpec& c,
                  double tol = kDefaultGeomTol);

/// Number of source atoms whose plan row has two or more entries.
int count_split_sources(const TransportPlan& plan);

/// True when the plan is a permutation matrix scaled by 1/n: n == m entries,
/// each row and column hit exactly once.
bool is_permutation_plan(const TransportPlan& plan, int n, int m, double mass_tol = 1e-12);

}  // namespace ot2d

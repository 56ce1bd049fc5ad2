#include "ot2d/plan.hpp"

#include <algorithm>
#include <cmath>

namespace ot2d {

double TransportPlan::total_mass() const {
  double t = 0.0;
  for (const PlanEntry& e : entries) t += e.mass;
  return t;
}

void TransportPlan::sort_entries() {
  std::sort(entries.begin(), entries.end(), [](const PlanEntry& a, const PlanEntry& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
}

std::vector<double> row_marginals(const TransportPlan& plan, int n) {
  std::vector<double> r(static_cast<std::size_t>(n), 0.0);
  for (const PlanEntry& e : plan.entries) r[e.i] += e.mass;
  return r;
}

std::vector<double> col_marginals(const TransportPlan& plan, int m) {
  std::vector<double> c(static_cast<std::size_t>(m), 0.0);
  for (const PlanEntry& e : plan.entries) c[e.j] += e.mass;
  return c;
}

double marginal_error(const TransportPlan& plan, const DiscreteMeasure& mu,
                      const DiscreteMeasure& nu) {
  const auto rows = row_marginals(plan, mu.size());
  const auto cols = col_marginals(plan, nu.size());
  double err = 0.0;
  for (int i = 0; i < mu.size(); ++i) err = std::max(err, std::fabs(rows[i] - mu.mass(i)));
  for (int j = 0; j < nu.size(); ++j) err = std::max(err, std::fabs(cols[j] - nu.mass(j)));
  return err;
}

ExtReal plan_cost(const TransportPlan& plan, const DiscreteMeasure& mu,
                  const DiscreteMeasure& nu, const CostSpec& c, double tol) {
  double total = 0.0;
  for (const PlanEntry& e : plan.entries) {
    const ExtReal v = cost_eval(c, mu.point(e.i) - nu.point(e.j), tol);
    if (!v.is_finite()) return ExtReal::infinity();
    total += v.value() * e.mass;
  }
  return ExtReal::finite(total);
}

int count_split_sources(const TransportPlan& plan) {
  std::vector<int> rows;
  rows.reserve(plan.entries.size());
  for (const PlanEntry& e : plan.entries) rows.push_back(e.i);
  std::sort(rows.begin(), rows.end());
  int split = 0;
  for (std::size_t k = 0; k < rows.size();) {
    std::size_t r = k;
    while (r < rows.size() && rows[r] == rows[k]) ++r;
    if (r - k >= 2) ++split;
    k = r;
  }
  return split;
}

bool is_permutation_plan(const TransportPlan& plan, int n, int m, double mass_tol) {
  if (n != m || static_cast<int>(plan.entries.size()) != n) return false;
  std::vector<char> row(static_cast<std::size_t>(n), 0), col(static_cast<std::size_t>(m), 0);
  const double expect = 1.0 / n;
  for (const PlanEntry& e : plan.entries) {
    if (row[e.i] || col[e.j]) return false;
    if (std::fabs(e.mass - expect) > mass_tol) return false;
    row[e.i] = col[e.j] = 1;
  }
  return true;
}

}  // namespace ot2d

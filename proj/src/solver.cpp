#include "ot2d/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <thread>

namespace ot2d {

namespace {

constexpr double kFlowJunk = 1e-15;    // below this, a flow change is degenerate
constexpr double kMarginalTol = 1e-12;

// ---------------------------------------------------------------------------
// Dinic max-flow on the admissibility graph, used both as the feasibility
// pre-check (with a cut witness on failure) and to seed the simplex basis.
// Node layout: 0..n-1 sources, n..n+m-1 targets, S = n+m, T = n+m+1.
// ---------------------------------------------------------------------------
class MaxFlow {
 public:
  MaxFlow(int nodes) : head_(nodes, -1), level_(nodes), it_(nodes) {}

  int add_edge(int from, int to, double cap) {
    const int id = static_cast<int>(to_.size());
    to_.push_back(to);
    cap_.push_back(cap);
    next_.push_back(head_[from]);
    head_[from] = id;
    to_.push_back(from);
    cap_.push_back(0.0);
    next_.push_back(head_[to]);
    head_[to] = id + 1;
    return id;
  }

  double run(int s, int t) {
    double total = 0.0;
    while (bfs(s, t)) {
      std::copy(head_.begin(), head_.end(), it_.begin());
      while (true) {
        const double pushed = dfs(s, t, std::numeric_limits<double>::infinity());
        if (pushed <= kFlowJunk) break;
        total += pushed;
      }
    }
    return total;
  }

  /// Residual reachability from s after run(); defines the witness cut.
  std::vector<char> reachable(int s) const {
    std::vector<char> seen(head_.size(), 0);
    std::vector<int> stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int e = head_[v]; e >= 0; e = next_[e]) {
        if (cap_[e] > kFlowJunk && !seen[to_[e]]) {
          seen[to_[e]] = 1;
          stack.push_back(to_[e]);
        }
      }
    }
    return seen;
  }

  /// Flow currently on a forward edge id returned by add_edge.
  double flow_on(int edge_id) const { return cap_[edge_id ^ 1]; }

 private:
  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    q.push(s);
    level_[s] = 0;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int e = head_[v]; e >= 0; e = next_[e]) {
        if (cap_[e] > kFlowJunk && level_[to_[e]] < 0) {
          level_[to_[e]] = level_[v] + 1;
          q.push(to_[e]);
        }
      }
    }
    return level_[t] >= 0;
  }

  double dfs(int v, int t, double limit) {
    if (v == t) return limit;
    for (int& e = it_[v]; e >= 0; e = next_[e]) {
      const int u = to_[e];
      if (cap_[e] > kFlowJunk && level_[u] == level_[v] + 1) {
        const double pushed = dfs(u, t, std::min(limit, cap_[e]));
        if (pushed > kFlowJunk) {
          cap_[e] -= pushed;
          cap_[e ^ 1] += pushed;
          return pushed;
        }
      }
    }
    level_[v] = -1;
    return 0.0;
  }

  std::vector<int> head_, to_, next_, level_, it_;
  std::vector<double> cap_;
};

// ---------------------------------------------------------------------------
// Primal network simplex on the bipartite transportation graph.
// Nodes 0..n-1 sources, n..n+m-1 targets, root = n+m. Real arcs are the
// admissible (i, j) pairs in lexicographic order; one zero-cost artificial
// arc per node points into the root. The root has zero balance and only
// incoming arcs, so artificial arcs can never carry flow and no big-M costs
// ever touch the potentials. The basis always starts feasible (north-west
// corner, or a cycle-cancelled max-flow support when some arcs are
// forbidden) and strongly so: every zero-flow basic arc points from child
// to parent, which the leaving-arc rule preserves and which keeps
// degenerate pivots from stalling.
// ---------------------------------------------------------------------------
class NetworkSimplex {
 public:
  NetworkSimplex(const std::vector<double>& supplies, const std::vector<double>& demands,
                 const CostMatrix& cost, const SolverOptions& opts)
      : n_(static_cast<int>(supplies.size())),
        m_(static_cast<int>(demands.size())),
        root_(n_ + m_),
        supplies_(supplies),
        demands_(demands),
        opts_(opts) {
    arc_of_pair_.assign(static_cast<std::size_t>(n_) * m_, -1);
    double max_cost = 0.0;
    for (int i = 0; i < n_; ++i) {
      for (int j = 0; j < m_; ++j) {
        if (!cost.finite(i, j)) continue;
        arc_of_pair_[static_cast<std::size_t>(i) * m_ + j] = static_cast<int>(tail_.size());
        tail_.push_back(i);
        head_.push_back(n_ + j);
        cost_.push_back(cost.at(i, j));
        max_cost = std::max(max_cost, std::fabs(cost.at(i, j)));
      }
    }
    real_arcs_ = static_cast<int>(tail_.size());
    all_admissible_ = real_arcs_ == n_ * m_;
    // artificial root connectors, one per node, index real_arcs_ + v
    for (int v = 0; v < n_ + m_; ++v) {
      tail_.push_back(v);
      head_.push_back(root_);
      cost_.push_back(0.0);
    }
    flow_.assign(tail_.size(), 0.0);
    basic_.assign(tail_.size(), 0);
    enter_eps_ = 1e-12 * std::max(1.0, max_cost);
  }

  SolveResult solve() {
    build_initial_basis();
    pivot_until_optimal();
    return extract();
  }

 private:
  bool is_artificial(int a) const { return a >= real_arcs_; }

  // ---- initial basis -----------------------------------------------------

  void build_initial_basis() {
    std::vector<std::pair<int, double>> forest;  // (arc, flow hint), acyclic support
    if (all_admissible_) {
      north_west_forest(forest);
    } else {
      max_flow_forest(forest);
    }

    // Basis = the positively flowed forest plus one artificial connector per
    // component. Zero-flow basic arcs are then exactly the connectors, which
    // point child-to-root, so the tree starts strongly feasible. Exact flow
    // recomputation can still zero a forest arc whose subtrees balance; such
    // arcs are dropped and the split components re-hung until none remain.
    std::vector<int> keep;
    keep.reserve(forest.size());
    for (const auto& [a, f] : forest) keep.push_back(a);
    while (true) {
      std::fill(basic_.begin(), basic_.end(), 0);
      std::fill(flow_.begin(), flow_.end(), 0.0);
      dsu_parent_.resize(n_ + m_);
      std::iota(dsu_parent_.begin(), dsu_parent_.end(), 0);
      for (const int a : keep) {
        basic_[a] = 1;
        dsu_union(tail_[a], head_[a]);
      }
      std::vector<char> attached(n_ + m_, 0);
      for (int v = 0; v < n_ + m_; ++v) {
        const int r = dsu_find(v);
        if (!attached[r]) {
          attached[r] = 1;
          basic_[real_arcs_ + v] = 1;
        }
      }

      rebuild_adjacency();
      recompute_tree();
      set_flows_from_marginals();

      std::vector<int> alive;
      alive.reserve(keep.size());
      for (const int a : keep) {
        if (flow_[a] > 0.0) alive.push_back(a);
      }
      if (alive.size() == keep.size()) break;
      keep.swap(alive);
    }
  }

  void north_west_forest(std::vector<std::pair<int, double>>& forest) {
    int i = 0, j = 0;
    double rs = supplies_[0], rd = demands_[0];
    while (i < n_ && j < m_) {
      const double alloc = std::min(rs, rd);
      if (alloc > 0.0) {
        forest.emplace_back(arc_of_pair_[static_cast<std::size_t>(i) * m_ + j], alloc);
      }
      rs -= alloc;
      rd -= alloc;
      const bool src_done = rs <= kFlowJunk;
      const bool dst_done = rd <= kFlowJunk;
      if (src_done && ++i < n_) rs = supplies_[i];
      if (dst_done && ++j < m_) rd = demands_[j];
      if (!src_done && !dst_done) break;  // cannot happen with positive masses
    }
  }

  void max_flow_forest(std::vector<std::pair<int, double>>& forest) {
    const int S = n_ + m_, T = n_ + m_ + 1;
    MaxFlow mf(n_ + m_ + 2);
    std::vector<int> supply_edge(n_), arc_edge(real_arcs_);
    double total = 0.0;
    for (int i = 0; i < n_; ++i) {
      supply_edge[i] = mf.add_edge(S, i, supplies_[i]);
      total += supplies_[i];
    }
    for (int j = 0; j < m_; ++j) mf.add_edge(n_ + j, T, demands_[j]);
    for (int a = 0; a < real_arcs_; ++a) {
      arc_edge[a] = mf.add_edge(tail_[a], head_[a], std::numeric_limits<double>::infinity());
    }

    const double sent = mf.run(S, T);
    if (sent < total - opts_.tol * std::max(1.0, total)) {
      InfeasibilityWitness w;
      const auto seen = mf.reachable(S);
      for (int i = 0; i < n_; ++i) {
        if (seen[i]) {
          w.sources.push_back(i);
          w.source_mass += supplies_[i];
        }
      }
      for (int j = 0; j < m_; ++j) {
        if (seen[n_ + j]) {
          w.targets.push_back(j);
          w.target_mass += demands_[j];
        }
      }
      throw InfeasibleError("no feasible plan: a source group exceeds its admissible targets",
                            std::move(w));
    }

    // support of the max flow, cancelled to a forest
    std::vector<double> f(real_arcs_, 0.0);
    std::vector<char> in_support(real_arcs_, 0);
    std::vector<std::vector<std::pair<int, int>>> adj(n_ + m_);  // (other node, arc)
    for (int a = 0; a < real_arcs_; ++a) {
      f[a] = mf.flow_on(arc_edge[a]);
      if (f[a] > kFlowJunk) {
        in_support[a] = 1;
        adj[tail_[a]].emplace_back(head_[a], a);
        adj[head_[a]].emplace_back(tail_[a], a);
      }
    }
    cancel_cycles(f, in_support, adj);
    for (int a = 0; a < real_arcs_; ++a) {
      if (in_support[a]) forest.emplace_back(a, f[a]);
    }
  }

  /// Removes undirected cycles from the support by pushing flow around each
  /// cycle until one arc empties. The exact amounts do not matter (flows are
  /// recomputed from the marginals on the final tree), only acyclicity does.
  void cancel_cycles(std::vector<double>& f, std::vector<char>& in_support,
                     std::vector<std::vector<std::pair<int, int>>>& adj) {
    const int nodes = n_ + m_;
    while (true) {
      // iterative DFS for a cycle over current support
      std::vector<int> par_node(nodes, -1), par_arc(nodes, -1);
      std::vector<char> state(nodes, 0);  // 0 new, 1 on stack, 2 done
      std::vector<int> cyc_arcs;
      bool found = false;
      for (int start = 0; start < nodes && !found; ++start) {
        if (state[start] != 0) continue;
        std::vector<int> stack{start};
        par_node[start] = start;
        while (!stack.empty() && !found) {
          const int v = stack.back();
          if (state[v] == 0) state[v] = 1;
          bool descended = false;
          for (const auto& [u, a] : adj[v]) {
            if (!in_support[a] || a == par_arc[v]) continue;
            if (state[u] == 0) {
              par_node[u] = v;
              par_arc[u] = a;
              stack.push_back(u);
              descended = true;
              break;
            }
            if (state[u] == 1) {  // back edge: cycle u .. v + arc a
              cyc_arcs.push_back(a);
              for (int x = v; x != u; x = par_node[x]) cyc_arcs.push_back(par_arc[x]);
              found = true;
              break;
            }
          }
          if (!descended && !found) {
            state[v] = 2;
            stack.pop_back();
          }
        }
      }
      if (!found) return;

      // orient around the cycle: walking the arc list, alternate sides by
      // whether the arc is traversed source->target or target->source
      double theta = std::numeric_limits<double>::infinity();
      // the cycle arcs alternate direction in a bipartite graph; pick the
      // smaller of the two alternating minima so one arc hits zero
      double min_even = std::numeric_limits<double>::infinity();
      double min_odd = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < cyc_arcs.size(); ++k) {
        double& mn = (k % 2 == 0) ? min_even : min_odd;
        mn = std::min(mn, f[cyc_arcs[k]]);
      }
      const bool even_side = min_even <= min_odd;
      theta = even_side ? min_even : min_odd;
      for (std::size_t k = 0; k < cyc_arcs.size(); ++k) {
        const bool decreasing = (k % 2 == 0) == even_side;
        f[cyc_arcs[k]] += decreasing ? -theta : theta;
        if (decreasing && f[cyc_arcs[k]] <= kFlowJunk) {
          f[cyc_arcs[k]] = 0.0;
          in_support[cyc_arcs[k]] = 0;
        }
      }
    }
  }

  // ---- tree bookkeeping ---------------------------------------------------

  void rebuild_adjacency() {
    adj_.assign(n_ + m_ + 1, {});
    for (std::size_t a = 0; a < tail_.size(); ++a) {
      if (!basic_[a]) continue;
      adj_[tail_[a]].push_back(static_cast<int>(a));
      adj_[head_[a]].push_back(static_cast<int>(a));
    }
  }

  /// Recomputes parent pointers, depths and potentials by one DFS from the
  /// root. Basic arcs have zero reduced cost, which pins the potentials.
  void recompute_tree() {
    const int nodes = n_ + m_ + 1;
    parent_.assign(nodes, -1);
    parent_arc_.assign(nodes, -1);
    depth_.assign(nodes, 0);
    pi_.assign(nodes, 0.0);
    order_.clear();
    order_.reserve(nodes);

    std::vector<int> stack{root_};
    parent_[root_] = root_;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      order_.push_back(v);
      for (const int a : adj_[v]) {
        const int u = tail_[a] == v ? head_[a] : tail_[a];
        if (parent_[u] >= 0) continue;
        parent_[u] = v;
        parent_arc_[u] = a;
        depth_[u] = depth_[v] + 1;
        // zero reduced cost on basic arcs: c - pi[tail] + pi[head] = 0
        pi_[u] = head_[a] == u ? pi_[v] - cost_[a] : pi_[v] + cost_[a];
        stack.push_back(u);
      }
    }
  }

  /// Flows are the unique values satisfying the node balances on the tree:
  /// push each subtree imbalance through its parent arc, deepest nodes first.
  void set_flows_from_marginals() {
    const int nodes = n_ + m_ + 1;
    std::vector<double> excess(nodes, 0.0);
    for (int i = 0; i < n_; ++i) excess[i] = supplies_[i];
    for (int j = 0; j < m_; ++j) excess[n_ + j] = -demands_[j];

    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
      const int v = *it;
      if (v == root_) continue;
      const int a = parent_arc_[v];
      double fl = tail_[a] == v ? excess[v] : -excess[v];
      if (is_artificial(a)) {
        if (std::fabs(fl) > 1e-9) {
          throw MassImbalanceError("internal: unbalanced component on root connector");
        }
        fl = 0.0;
      } else if (fl < 0.0) {
        if (fl < -1e-9) {
          throw MassImbalanceError("internal: negative flow in the initial basis");
        }
        fl = 0.0;
      }
      flow_[a] = fl;
      excess[parent_[v]] += excess[v];
    }
  }

  // ---- pivoting -----------------------------------------------------------

  double reduced_cost(int a) const { return cost_[a] - pi_[tail_[a]] + pi_[head_[a]]; }

  int find_entering_block() {
    const int block = std::max(64, static_cast<int>(std::sqrt(double(real_arcs_))));
    int scanned = 0;
    int best = -1;
    double best_rc = -enter_eps_;
    int a = scan_pos_;
    while (scanned < real_arcs_) {
      for (int k = 0; k < block && scanned < real_arcs_; ++k, ++scanned) {
        if (a >= real_arcs_) a = 0;
        if (!basic_[a]) {
          const double rc = reduced_cost(a);
          if (rc < best_rc) {
            best_rc = rc;
            best = a;
          }
        }
        ++a;
      }
      if (best >= 0) break;
    }
    scan_pos_ = a >= real_arcs_ ? 0 : a;
    return best;
  }

  int find_entering_bland() const {
    for (int a = 0; a < real_arcs_; ++a) {
      if (!basic_[a] && reduced_cost(a) < -enter_eps_) return a;
    }
    return -1;
  }

  struct CycleArc {
    int arc;
    bool increases;
  };

  void pivot_until_optimal() {
    const long long bland_trigger = 2LL * (n_ + m_) + 16;
    long long degenerate_run = 0;
    bool bland = false;
    std::vector<CycleArc> down_path, up_path, cycle;

    while (true) {
      const int e = bland ? find_entering_bland() : find_entering_block();
      if (e < 0) break;

      // cycle traversed from the apex in the entering arc's direction:
      // apex -> tail(e) descending, then e, then head(e) -> apex ascending
      down_path.clear();
      up_path.clear();
      int x = tail_[e], y = head_[e];
      while (depth_[x] > depth_[y]) {
        const int a = parent_arc_[x];
        down_path.push_back({a, head_[a] == x});  // traversed parent -> x
        x = parent_[x];
      }
      while (depth_[y] > depth_[x]) {
        const int a = parent_arc_[y];
        up_path.push_back({a, tail_[a] == y});  // traversed y -> parent
        y = parent_[y];
      }
      while (x != y) {
        const int ax = parent_arc_[x];
        down_path.push_back({ax, head_[ax] == x});
        x = parent_[x];
        const int ay = parent_arc_[y];
        up_path.push_back({ay, tail_[ay] == y});
        y = parent_[y];
      }
      cycle.clear();
      cycle.insert(cycle.end(), down_path.rbegin(), down_path.rend());
      cycle.push_back({e, true});
      cycle.insert(cycle.end(), up_path.begin(), up_path.end());

      // ratio test: arcs are uncapacitated in their own direction (the root
      // has zero balance and only incoming arcs, so connectors stay empty by
      // balance alone), hence only arcs traversed backwards block
      double theta = std::numeric_limits<double>::infinity();
      for (const CycleArc& ca : cycle) {
        if (!ca.increases) theta = std::min(theta, flow_[ca.arc]);
      }
      if (!std::isfinite(theta)) {
        throw std::logic_error("network simplex: unbounded pivot on a bounded polytope");
      }

      // leaving arc: the last blocker in traversal order keeps the basis
      // strongly feasible, so degenerate runs terminate; lowest arc index
      // instead while the Bland fallback is active
      int leaving = -1;
      for (const CycleArc& ca : cycle) {
        if (ca.increases || flow_[ca.arc] != theta) continue;
        if (!bland || leaving < 0 || ca.arc < leaving) leaving = ca.arc;
      }
      if (leaving < 0) {
        throw std::logic_error("network simplex: no blocking arc on a pivot cycle");
      }

      if (theta > 0.0) {
        for (const CycleArc& ca : cycle) {
          flow_[ca.arc] += ca.increases ? theta : -theta;
        }
      }
      flow_[leaving] = 0.0;
      basic_[e] = 1;
      basic_[leaving] = 0;
      adj_remove(tail_[leaving], leaving);
      adj_remove(head_[leaving], leaving);
      adj_[tail_[e]].push_back(e);
      adj_[head_[e]].push_back(e);
      recompute_tree();

      if (theta <= kFlowJunk) {
        ++degenerate_run;
        if (degenerate_run > bland_trigger) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
    }
  }

  void adj_remove(int node, int arc) {
    auto& v = adj_[node];
    v.erase(std::find(v.begin(), v.end(), arc));
  }

  // ---- extraction ----------------------------------------------------------

  SolveResult extract() {
    SolveResult r;
    double value = 0.0;
    for (int a = 0; a < real_arcs_; ++a) {
      if (flow_[a] > opts_.zero_mass_tol) {
        r.plan.entries.push_back({tail_[a], head_[a] - n_, flow_[a]});
        value += cost_[a] * flow_[a];
      }
    }
    r.value = value;
    r.potentials.phi.resize(n_);
    r.potentials.psi.resize(m_);
    const double shift = pi_[0];
    for (int i = 0; i < n_; ++i) r.potentials.phi[i] = pi_[i] - shift;
    for (int j = 0; j < m_; ++j) r.potentials.psi[j] = -pi_[n_ + j] + shift;
    return r;
  }

  // ---- DSU -----------------------------------------------------------------

  int dsu_find(int v) {
    while (dsu_parent_[v] != v) {
      dsu_parent_[v] = dsu_parent_[dsu_parent_[v]];
      v = dsu_parent_[v];
    }
    return v;
  }
  void dsu_union(int a, int b) { dsu_parent_[dsu_find(a)] = dsu_find(b); }

  int n_, m_, root_;
  std::vector<double> supplies_, demands_;
  SolverOptions opts_;

  std::vector<int> tail_, head_;
  std::vector<double> cost_, flow_;
  std::vector<char> basic_;
  std::vector<int> arc_of_pair_;
  int real_arcs_ = 0;
  bool all_admissible_ = false;
  double enter_eps_ = 1e-12;
  int scan_pos_ = 0;

  std::vector<std::vector<int>> adj_;
  std::vector<int> parent_, parent_arc_, depth_, order_;
  std::vector<double> pi_;
  std::vector<int> dsu_parent_;
};

double checked_total(const std::vector<double>& masses, const char* what) {
  double t = 0.0;
  for (double v : masses) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string(what) + ": masses must be positive and finite");
    }
    t += v;
  }
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------

CostMatrix::CostMatrix(int n, int m)
    : n_(n), m_(m), cost_(static_cast<std::size_t>(n) * m, 0.0),
      finite_(static_cast<std::size_t>(n) * m, 0) {}

void CostMatrix::set(int i, int j, ExtReal v) {
  finite_[idx(i, j)] = v.is_finite() ? 1 : 0;
  cost_[idx(i, j)] = v.value_or(0.0);
}

ExtReal CostMatrix::get(int i, int j) const {
  return finite(i, j) ? ExtReal::finite(at(i, j)) : ExtReal::infinity();
}

CostMatrix assemble_cost_matrix(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                const CostSpec& c, const SolverOptions& opts) {
  const int n = mu.size(), m = nu.size();
  CostMatrix mat(n, m);
  const int threads = std::clamp(opts.threads, 1, n);
  auto fill_rows = [&](int lo, int hi) {
    for (int i = lo; i < hi; ++i) {
      for (int j = 0; j < m; ++j) {
        mat.set(i, j, cost_eval(c, mu.point(i) - nu.point(j)));
      }
    }
  };
  if (threads == 1) {
    fill_rows(0, n);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      const int lo = t * chunk, hi = std::min(n, lo + chunk);
      if (lo < hi) pool.emplace_back(fill_rows, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return mat;
}

SolveResult solve_transport(const std::vector<double>& supplies,
                            const std::vector<double>& demands, const CostMatrix& cost,
                            const SolverOptions& opts) {
  if (static_cast<int>(supplies.size()) != cost.rows() ||
      static_cast<int>(demands.size()) != cost.cols()) {
    throw std::invalid_argument("solve_transport: size mismatch with cost matrix");
  }
  const double ts = checked_total(supplies, "solve_transport");
  const double td = checked_total(demands, "solve_transport");
  if (std::fabs(ts - td) > kMarginalTol * std::max(1.0, ts)) {
    throw MassImbalanceError("solve_transport: supplies and demands must balance");
  }
  NetworkSimplex ns(supplies, demands, cost, opts);
  return ns.solve();
}

SolveResult solve_kantorovich(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                              const CostSpec& c, const SolverOptions& opts) {
  const CostMatrix mat = assemble_cost_matrix(mu, nu, c, opts);
  return solve_transport(mu.masses(), nu.masses(), mat, opts);
}

// ---------------------------------------------------------------------------

namespace {

double permutation_minimum(const DiscreteMeasure& mu, const CostMatrix& mat) {
  const int n = mu.size();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double v = 0.0;
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      if (!mat.finite(i, perm[i])) {
        ok = false;
      } else {
        v += mu.mass(i) * mat.at(i, perm[i]);
      }
    }
    if (ok) best = std::min(best, v);
  } while (std::next_permutation(perm.begin(), perm.end()));
  if (!std::isfinite(best)) {
    throw InfeasibleError("brute_force_value: no feasible assignment exists");
  }
  return best;
}

double forest_minimum(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                      const CostMatrix& mat) {
  const int n = mu.size(), m = nu.size();
  struct Arc {
    int i, j;
    double c;
  };
  std::vector<Arc> arcs;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      if (mat.finite(i, j)) arcs.push_back({i, j, mat.at(i, j)});
    }
  }
  const int A = static_cast<int>(arcs.size());
  const int nodes = n + m;
  double best = std::numeric_limits<double>::infinity();

  // every vertex of the transportation polytope has forest support, so the
  // minimum over balanced nonnegative forests is the LP optimum
  std::vector<double> excess(nodes);
  std::vector<int> deg(nodes), arc_at(nodes);
  std::vector<std::vector<int>> incid(nodes);
  for (std::uint32_t mask = 0; mask < (1u << A); ++mask) {
    std::fill(deg.begin(), deg.end(), 0);
    for (int v = 0; v < nodes; ++v) incid[v].clear();
    int edges = 0;
    for (int a = 0; a < A; ++a) {
      if (!(mask & (1u << a))) continue;
      ++edges;
      incid[arcs[a].i].push_back(a);
      incid[n + arcs[a].j].push_back(a);
    }
    if (edges > nodes - 1) continue;

    for (int i = 0; i < n; ++i) excess[i] = mu.mass(i);
    for (int j = 0; j < m; ++j) excess[n + j] = -nu.mass(j);
    for (int v = 0; v < nodes; ++v) deg[v] = static_cast<int>(incid[v].size());

    // peel leaves; acyclicity and balance fall out together
    std::vector<int> queue;
    std::vector<char> used_arc(A, 0), done(nodes, 0);
    for (int v = 0; v < nodes; ++v) {
      if (deg[v] == 1) queue.push_back(v);
    }
    double value = 0.0;
    bool ok = true;
    int processed_edges = 0;
    while (!queue.empty() && ok) {
      const int v = queue.back();
      queue.pop_back();
      if (done[v] || deg[v] != 1) continue;
      int live = -1;
      for (int a : incid[v]) {
        if (!used_arc[a]) live = a;
      }
      if (live < 0) continue;
      const Arc& arc = arcs[live];
      const int other = (arc.i == v) ? n + arc.j : arc.i;
      const double fl = (arc.i == v) ? excess[v] : -excess[v];
      if (fl < -1e-12) {
        ok = false;
        break;
      }
      value += std::max(fl, 0.0) * arc.c;
      excess[other] += excess[v];
      excess[v] = 0.0;
      done[v] = 1;
      used_arc[live] = 1;
      ++processed_edges;
      if (--deg[other] == 1 && !done[other]) queue.push_back(other);
      deg[v] = 0;
    }
    if (!ok || processed_edges != edges) continue;  // cycle or stranded edge
    bool balanced = true;
    for (int v = 0; v < nodes; ++v) {
      if (std::fabs(excess[v]) > 1e-12) {
        balanced = false;
        break;
      }
    }
    if (balanced) best = std::min(best, value);
  }
  if (!std::isfinite(best)) {
    throw InfeasibleError("brute_force_value: no feasible assignment exists");
  }
  return best;
}

}  // namespace

double brute_force_value(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                         const CostSpec& c) {
  const int n = mu.size(), m = nu.size();
  const bool square_equal = n == m && mu.equal_masses() && nu.equal_masses();
  if (square_equal && n <= 8) {
    const CostMatrix mat = assemble_cost_matrix(mu, nu, c);
    return permutation_minimum(mu, mat);
  }
  if (n * m <= 12) {
    const CostMatrix mat = assemble_cost_matrix(mu, nu, c);
    return forest_minimum(mu, nu, mat);
  }
  throw TooLargeError(
      "brute_force_value: instance exceeds enumeration bounds (equal-mass n <= 8 or n*m <= 12)");
}

// ---------------------------------------------------------------------------

bool DualityReport::pass(double tol) const {
  const double scale = tol * (1.0 + std::fabs(primal_value));
  return infeasible_support_entries == 0 && max_violation <= scale &&
         max_slack_on_support <= scale && duality_gap <= scale &&
         marginal_error <= kMarginalTol;
}

DualityReport verify_duality(const TransportPlan& plan, const DualPotentials& pots,
                             const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                             const CostSpec& c, double tol) {
  const int n = mu.size(), m = nu.size();
  if (static_cast<int>(pots.phi.size()) != n || static_cast<int>(pots.psi.size()) != m) {
    throw std::invalid_argument("verify_duality: potential sizes do not match the measures");
  }

  DualityReport r;
  for (int i = 0; i < n; ++i) {
    const double phi = pots.phi[i];
    for (int j = 0; j < m; ++j) {
      const ExtReal cij = cost_eval(c, mu.point(i) - nu.point(j));
      if (!cij.is_finite()) continue;  // the constraint is vacuous there
      r.max_violation = std::max(r.max_violation, phi + pots.psi[j] - cij.value());
    }
  }

  double primal = 0.0;
  for (const PlanEntry& e : plan.entries) {
    const ExtReal cij = cost_eval(c, mu.point(e.i) - nu.point(e.j));
    if (!cij.is_finite()) {
      ++r.infeasible_support_entries;
      continue;
    }
    primal += cij.value() * e.mass;
    r.max_slack_on_support =
        std::max(r.max_slack_on_support, std::fabs(cij.value() - pots.phi[e.i] - pots.psi[e.j]));
  }
  double dual = 0.0;
  for (int i = 0; i < n; ++i) dual += pots.phi[i] * mu.mass(i);
  for (int j = 0; j < m; ++j) dual += pots.psi[j] * nu.mass(j);

  r.primal_value = primal;
  r.dual_value = dual;
  r.duality_gap = std::fabs(primal - dual);
  r.marginal_error = marginal_error(plan, mu, nu);
  r.passed = r.pass(tol);
  return r;
}

double linf_gauge_value(const TransportPlan& plan, const DiscreteMeasure& mu,
                        const DiscreteMeasure& nu, const ConvexBody& K) {
  double worst = 0.0;
  for (const PlanEntry& e : plan.entries) {
    const Vec2 z = mu.point(e.i) - nu.point(e.j);
    double g;
    if (const auto* poly = std::get_if<ConvexPolygon>(&K)) {
      g = polygon_gauge(*poly, z);
    } else {
      g = norm(z) / std::get<Disk>(K).radius;
    }
    worst = std::max(worst, g);
  }
  return worst;
}

}  // namespace ot2d

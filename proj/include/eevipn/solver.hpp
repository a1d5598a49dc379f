#pragma once

#include <chrono>
#include <cmath>
#include <vector>

#include "eevipn/milp.hpp"
#include "eevipn/routing.hpp"
#include "eevipn/simplex.hpp"

namespace eevipn {

struct SolveLimits {
  long max_nodes = 200000;
  double max_seconds = 120.0;
};

enum class SolveStatus { optimal, infeasible, node_limit };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::node_limit: return "node_limit";
  }
  return "?";
}

struct SolveResult {
  SolveStatus status = SolveStatus::infeasible;
  double objective = 0;
  Assignment assignment;
  FlowSet flows;
  long nodes = 0;
  double wall_seconds = 0;
};

namespace detail {

inline Assignment extract_assignment(const MilpModel& m, const std::vector<double>& x) {
  Assignment a;
  for (const UVarMeta& u : m.u_vars)
    if (x[u.var] > 0.5) a.serves.push_back({u.requester, u.server, u.task});

  // Canonical VM completion: relays that actually serve, padded with the
  // lowest-id eligible relays up to the budget the model enforces. Unused VM
  // locations carry no power and no objective weight, so this keeps output
  // deterministic across equivalent optima.
  long budget = 0;
  for (auto [relay, var] : m.v_vars) budget += x[var] > 0.5 ? 1 : 0;
  for (const ServeTriple& s : a.serves)
    if (s.server.is_relay() && !a.vm_open(s.server.id)) {
      a.open_vms.push_back(s.server.id);
      std::sort(a.open_vms.begin(), a.open_vms.end());
    }
  for (auto [relay, var] : m.v_vars) {
    if (static_cast<long>(a.open_vms.size()) >= budget) break;
    if (!a.vm_open(relay)) {
      a.open_vms.push_back(relay);
      std::sort(a.open_vms.begin(), a.open_vms.end());
    }
  }
  a.normalize();
  return a;
}

inline FlowSet extract_flows(const MilpModel& m, const std::vector<double>& x) {
  FlowSet f;
  for (const DemandVarMeta& d : m.demand_vars) {
    const double v = x[d.var];
    if (v <= 1e-9) continue;
    (d.result ? f.demand_s : f.demand_q)[{d.x, d.y}] = v;
  }
  for (const FlowVarMeta& fl : m.flow_vars) {
    const double v = x[fl.var];
    if (v <= 1e-9) continue;
    (fl.result ? f.link_s : f.link_q)[{fl.x, fl.y, fl.a, fl.b}] = v;
    (fl.result ? f.agg_s : f.agg_q)[{fl.a, fl.b}] += v;
  }
  return f;
}

}  // namespace detail

/// Depth-first branch-and-bound over the binary variables with the bounded
/// simplex as relaxation. Deterministic throughout: most-fractional
/// branching (ties to the lowest variable name), the nearer bound explored
/// first, and among equal-objective optima the lexicographically smallest
/// assignment is kept (equal-bound subtrees are never pruned).
inline SolveResult solve_exact(const MilpModel& m, const SolveLimits& limits = {}) {
  if (!m.has_binding)
    throw StructuralError("solve_exact needs a model built from an instance");
  const auto t0 = std::chrono::steady_clock::now();

  LpProblem base;
  base.obj.resize(m.vars.size());
  base.lo.resize(m.vars.size());
  base.up.resize(m.vars.size());
  for (std::size_t j = 0; j < m.vars.size(); ++j) {
    base.obj[j] = m.maximize ? -m.vars[j].obj : m.vars[j].obj;
    base.lo[j] = m.vars[j].lo;
    base.up[j] = m.vars[j].up;
  }
  base.rows = m.rows;

  std::vector<int> binaries;
  for (std::size_t j = 0; j < m.vars.size(); ++j)
    if (m.vars[j].is_binary) binaries.push_back(static_cast<int>(j));

  struct NodeFix {
    int var;
    double value;
  };
  std::vector<std::vector<NodeFix>> stack{{}};

  // The empty assignment with the canonical VM completion is always
  // feasible, so every outcome (including budget exhaustion) carries a
  // usable incumbent and the zero-weight optimum needs no search at all.
  SolveResult best;
  best.objective = 0;
  for (const MilpRow& row : m.rows)
    if (row.name == "c10")
      for (auto [relay, var] : m.v_vars) {
        if (static_cast<double>(best.assignment.open_vms.size()) >= row.up) break;
        best.assignment.open_vms.push_back(relay);
      }
  std::vector<double> x_best;
  long nodes = 0;
  bool out_of_budget = false;

  while (!stack.empty()) {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (nodes >= limits.max_nodes || elapsed > limits.max_seconds) {
      out_of_budget = true;
      break;
    }
    std::vector<NodeFix> fixes = std::move(stack.back());
    stack.pop_back();

    LpProblem p = base;
    for (const NodeFix& f : fixes) {
      p.lo[f.var] = f.value;
      p.up[f.var] = f.value;
    }
    ++nodes;
    const long lp_iters = 20000 + 20L * static_cast<long>(p.rows.size() + p.obj.size());
    const LpSolution sol = solve_lp(p, lp_iters);
    if (sol.status == LpStatus::infeasible) continue;
    if (sol.status != LpStatus::optimal) {
      // A subproblem the simplex cannot finish means optimality can no
      // longer be certified; stop and report the best incumbent.
      out_of_budget = true;
      break;
    }
    const double bound = m.maximize ? -sol.objective : sol.objective;
    const double tol = 1e-9 * std::max(1.0, std::abs(best.objective));
    if (bound < best.objective - tol) continue;

    // Most fractional binary; ties go to the lexicographically first name.
    // The integrality cutoff sits below 1/big_m so a VM indicator cannot
    // smuggle real serving capacity through as rounding noise.
    int branch = -1;
    double best_frac = 1e-7;
    for (int j : binaries) {
      const double frac = std::min(sol.x[j] - std::floor(sol.x[j]),
                                   std::ceil(sol.x[j]) - sol.x[j]);
      if (frac > best_frac + 1e-12 ||
          (branch >= 0 && std::abs(frac - best_frac) <= 1e-12 &&
           m.vars[j].name < m.vars[branch].name)) {
        best_frac = frac;
        branch = j;
      }
    }

    if (branch < 0) {
      Assignment cand = detail::extract_assignment(m, sol.x);
      const bool better = bound > best.objective + tol;
      const bool tie = !better && bound >= best.objective - tol;
      if (better || (tie && cand < best.assignment)) {
        best.objective = bound;
        best.assignment = std::move(cand);
        x_best = sol.x;
      }
      continue;
    }

    const double near = sol.x[branch] >= 0.5 ? 1.0 : 0.0;
    std::vector<NodeFix> far_child = fixes;
    far_child.push_back({branch, 1.0 - near});
    fixes.push_back({branch, near});
    stack.push_back(std::move(far_child));
    stack.push_back(std::move(fixes));  // nearer bound on top, explored first
  }

  best.nodes = nodes;
  best.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  best.status = out_of_budget ? SolveStatus::node_limit : SolveStatus::optimal;
  if (!x_best.empty()) best.flows = detail::extract_flows(m, x_best);
  return best;
}

}  // namespace eevipn

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sip/domain.hpp"
#include "sip/errors.hpp"
#include "sip/expr.hpp"

namespace sip {

struct OptConfig {
  double eps_obj = 1e-6;    // optimality slack for pruning
  double eps_feas = 1e-8;   // acceptance band for incumbent constraints
  long max_nodes = 1000000; // processed-node cap

  void validate() const {
    if (!(eps_obj > 0.0) || !(eps_feas > 0.0) || max_nodes < 1)
      throw Error("optimizer configuration: tolerances must be positive and "
                  "max_nodes at least 1");
  }
};

enum class OptStatus { Solved, Infeasible, DepthCapReached };

// Result of a certified solve. For minimize, lower_bound is a rigorous lower
// bound on the exact constrained minimum regardless of incumbent quality. For
// maximize (see below) the fields are sign-flipped: incumbent_value
// approximates the supremum and lower_bound carries a certified UPPER bound
// on it.
struct CertifiedMin {
  std::optional<PointVec> incumbent;
  double incumbent_value = std::numeric_limits<double>::infinity();
  double lower_bound = -std::numeric_limits<double>::infinity();
  OptStatus status = OptStatus::Solved;
  long nodes = 0;

  bool operator==(const CertifiedMin&) const = default;
};

namespace detail {

struct BnbNode {
  std::vector<Interval> box;
  double obj_lo;
  long seq;
};

// Best-first on the objective lower bound, FIFO on ties.
struct BnbNodeOrder {
  bool operator()(const BnbNode& a, const BnbNode& b) const {
    if (a.obj_lo != b.obj_lo) return a.obj_lo > b.obj_lo;
    return a.seq > b.seq;
  }
};

}  // namespace detail

// Deterministic eps-global minimization of `objective` over `box` subject to
// every `constraints[i] <= 0`, by interval branch and bound. Expressions must
// reference x variables covered by the box (and no y variables).
//
// A node is discarded as infeasible when some constraint interval lower bound
// exceeds eps_feas, and pruned when its objective interval lower bound
// reaches incumbent_value - eps_obj * max(1, |incumbent_value|). Incumbents
// come from box midpoints and corners that satisfy every constraint within
// eps_feas. The reported lower_bound is the smallest objective interval lower
// bound over all pruned and still-open nodes.
inline CertifiedMin minimize(const ExprPtr& objective, const BoxRegion& box,
                             const std::vector<ExprPtr>& constraints,
                             const OptConfig& cfg) {
  cfg.validate();
  const VarUsage obj_use = var_usage(*objective);
  if (obj_use.y_count > 0)
    throw UnboundVariable("minimize expects an x-variable expression");
  if (static_cast<std::size_t>(obj_use.x_count) > box.size())
    throw UnboundVariable("objective references variables beyond the box");
  for (const ExprPtr& c : constraints) {
    const VarUsage u = var_usage(*c);
    if (u.y_count > 0 || static_cast<std::size_t>(u.x_count) > box.size())
      throw UnboundVariable("constraint references variables beyond the box");
  }

  constexpr double kWidthFloor = 1e-13;
  const double inf = std::numeric_limits<double>::infinity();

  // Dimensions no expression mentions are pinned at their midpoints: the
  // optimum does not depend on them and splitting them would only multiply
  // the search (a flat direction turns every near-optimal box into a
  // continuum of unprunable siblings).
  BoxRegion root = box;
  {
    std::vector<bool> used(box.size(), false);
    std::vector<bool> no_y;
    mark_used_vars(*objective, used, no_y);
    for (const ExprPtr& c : constraints) mark_used_vars(*c, used, no_y);
    for (std::size_t i = 0; i < box.size(); ++i)
      if (!used[i]) {
        const double mid = box.dims[i].midpoint();
        root.dims[i] = Interval(mid, mid);
      }
  }

  std::optional<PointVec> best_point;
  double best_value = inf;

  auto try_point = [&](std::vector<double> coords) {
    try {
      PointVec p(std::move(coords));
      const VarAssignment a{p, PointVec{}};
      for (const ExprPtr& c : constraints)
        if (!(eval_point(*c, a) <= cfg.eps_feas)) return;
      const double v = eval_point(*objective, a);
      if (!std::isfinite(v)) return;
      if (v < best_value) {
        best_value = v;
        best_point = std::move(p);
      }
    } catch (const EvalError&) {
      // a candidate that cannot be evaluated is simply not an incumbent
    }
  };

  // A zero-straddling denominator or an overflow means the bound is unknown
  // at this width; the node must keep splitting until it resolves.
  auto objective_lo = [&](const std::vector<Interval>& dims) -> double {
    try {
      return eval_interval(*objective, std::span<const Interval>(dims)).lo;
    } catch (const EvalError&) {
      return -inf;
    }
  };

  auto certified_infeasible = [&](const std::vector<Interval>& dims) -> bool {
    for (const ExprPtr& c : constraints) {
      try {
        if (eval_interval(*c, std::span<const Interval>(dims)).lo >
            cfg.eps_feas)
          return true;
      } catch (const EvalError&) {
        // inconclusive; cannot certify anything on this node
      }
    }
    return false;
  };

  auto scan_candidates = [&](const BoxRegion& b) {
    try_point(b.midpoint().coords);
    if (b.size() <= 16)
      for (std::uint64_t m = 0; m < b.corner_count(); ++m)
        try_point(b.corner(m));
  };

  std::priority_queue<detail::BnbNode, std::vector<detail::BnbNode>,
                      detail::BnbNodeOrder>
      open;
  long seq = 0;
  long pops = 0;
  double retired_lo = inf;  // min obj_lo over pruned / resolution-limited nodes
  bool floor_retired = false;
  bool aborted = false;

  if (!certified_infeasible(root.dims)) {
    scan_candidates(root);
    open.push({root.dims, objective_lo(root.dims), seq++});
  }

  while (!open.empty()) {
    if (pops >= cfg.max_nodes) {
      aborted = true;
      break;
    }
    detail::BnbNode node = open.top();
    open.pop();
    ++pops;

    const double prune_at =
        std::isfinite(best_value)
            ? best_value - cfg.eps_obj * std::max(1.0, std::abs(best_value))
            : inf;
    if (node.obj_lo >= prune_at) {
      retired_lo = std::min(retired_lo, node.obj_lo);
      continue;
    }

    const BoxRegion node_box{std::move(node.box)};
    const std::size_t axis = node_box.widest_dim();
    const Interval& widest = node_box.dims[axis];
    const double mid = widest.midpoint();
    if (widest.width() <= kWidthFloor || !(mid > widest.lo) ||
        !(mid < widest.hi)) {
      if (node.obj_lo == -inf) {
        // an unresolved denominator survived down to the width floor
        aborted = true;
        retired_lo = std::min(retired_lo, node.obj_lo);
        break;
      }
      retired_lo = std::min(retired_lo, node.obj_lo);
      floor_retired = true;
      continue;
    }

    auto children = split_widest(node_box);
    for (BoxRegion* child : {&children.first, &children.second}) {
      if (certified_infeasible(child->dims)) continue;
      scan_candidates(*child);
      const double child_lo = objective_lo(child->dims);
      open.push({std::move(child->dims), child_lo, seq++});
    }
  }

  double bound = retired_lo;
  while (!open.empty()) {
    bound = std::min(bound, open.top().obj_lo);
    open.pop();
  }

  CertifiedMin out;
  out.nodes = pops;
  if (aborted) {
    out.status = OptStatus::DepthCapReached;
    out.lower_bound = bound;
    if (best_point) {
      out.incumbent = best_point;
      out.incumbent_value = best_value;
      out.lower_bound = std::min(out.lower_bound, best_value);
    }
    return out;
  }
  if (best_point) {
    out.status = OptStatus::Solved;
    out.incumbent = best_point;
    out.incumbent_value = best_value;
    out.lower_bound = std::min(bound, best_value);
    return out;
  }
  if (bound == inf && !floor_retired) {
    // every node was certified infeasible on an exhaustive cover
    out.status = OptStatus::Infeasible;
    out.lower_bound = inf;
    return out;
  }
  // resolution exhausted without ever finding an acceptable point
  out.status = OptStatus::DepthCapReached;
  out.lower_bound = bound;
  return out;
}

// Certified maximization of a y-variable expression over a box bound to the
// y axis. Returned with flipped signs: incumbent_value approximates the
// supremum from below and lower_bound holds a certified upper bound on it.
inline CertifiedMin maximize(const ExprPtr& objective, const BoxRegion& box,
                             const OptConfig& cfg) {
  const VarUsage u = var_usage(*objective);
  if (u.x_count > 0)
    throw UnboundVariable("maximize expects a y-variable expression");
  CertifiedMin m = minimize(neg(relabel_y_as_x(objective)), box, {}, cfg);
  CertifiedMin out = m;
  out.incumbent_value = -m.incumbent_value;
  out.lower_bound = -m.lower_bound;
  return out;
}

// Exhaustive evaluation on a uniform grid that includes the box corners.
// Returns the minimum objective over grid points whose constraints are all
// <= feas_tol, or +infinity when no grid point qualifies.
inline double grid_min(const ExprPtr& objective, const BoxRegion& box,
                       const std::vector<ExprPtr>& constraints,
                       int points_per_dim, double feas_tol = 0.0) {
  if (points_per_dim < 2) throw Error("grid needs at least 2 points per dim");
  double total = 1.0;
  for (std::size_t i = 0; i < box.size(); ++i) total *= points_per_dim;
  if (total > 1e7) throw GridSizeExceeded("grid would exceed 1e7 points");

  const std::size_t n = box.size();
  std::vector<int> idx(n, 0);
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> coords(n);
  for (;;) {
    for (std::size_t i = 0; i < n; ++i)
      coords[i] = box.dims[i].lo + (box.dims[i].hi - box.dims[i].lo) *
                                       static_cast<double>(idx[i]) /
                                       static_cast<double>(points_per_dim - 1);
    try {
      const VarAssignment a{PointVec(coords), PointVec{}};
      bool ok = true;
      for (const ExprPtr& c : constraints)
        if (!(eval_point(*c, a) <= feas_tol)) {
          ok = false;
          break;
        }
      if (ok) best = std::min(best, eval_point(*objective, a));
    } catch (const EvalError&) {
      // skip grid points where evaluation is undefined
    }
    std::size_t d = 0;
    while (d < n && ++idx[d] == points_per_dim) idx[d++] = 0;
    if (d == n) break;
  }
  return best;
}

}  // namespace sip

#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "sip/domain.hpp"
#include "sip/errors.hpp"
#include "sip/expr.hpp"
#include "sip/globalopt.hpp"

namespace sip {

// One semi-infinite instance:
//
//   minimize objective(x) over x in x_box
//   subject to constraint(x, y) <= 0 for every y in y_box.
struct SipInstance {
  std::string name;
  ExprPtr objective;   // x variables only
  ExprPtr constraint;  // x and y variables
  BoxRegion x_box;
  BoxRegion y_box;

  SipInstance(std::string name_in, ExprPtr objective_in, ExprPtr constraint_in,
              BoxRegion x_box_in, BoxRegion y_box_in)
      : name(std::move(name_in)),
        objective(std::move(objective_in)),
        constraint(std::move(constraint_in)),
        x_box(std::move(x_box_in)),
        y_box(std::move(y_box_in)) {
    const VarUsage fu = var_usage(*objective);
    if (fu.y_count > 0)
      throw Error("objective must not reference y variables");
    if (static_cast<std::size_t>(fu.x_count) > x_box.size())
      throw Error("objective references x variables beyond the X box");
    const VarUsage gu = var_usage(*constraint);
    if (static_cast<std::size_t>(gu.x_count) > x_box.size() ||
        static_cast<std::size_t>(gu.y_count) > y_box.size())
      throw Error("constraint references variables beyond the boxes");
  }

  std::size_t x_dim() const { return x_box.size(); }
  std::size_t y_dim() const { return y_box.size(); }

  friend bool operator==(const SipInstance& a, const SipInstance& b) {
    return a.name == b.name && a.x_box == b.x_box && a.y_box == b.y_box &&
           structurally_equal(*a.objective, *b.objective) &&
           structurally_equal(*a.constraint, *b.constraint);
  }
};

// The finite index set of the relaxed problem: an ordered, append-only list
// of y points.
struct Discretization {
  std::vector<PointVec> points;

  Discretization() = default;
  explicit Discretization(std::vector<PointVec> pts) : points(std::move(pts)) {}

  std::size_t size() const { return points.size(); }
  void append(PointVec p) { points.push_back(std::move(p)); }
};

// 1-D instance used throughout the tests and available as --builtin cex:
// minimize -x over [-1,1] with 2x - y <= 0 for all y in [-1,1]. Its feasible
// set is [-1, -1/2] and the optimal value is 1/2.
inline SipInstance builtin_counterexample() {
  return SipInstance("cex", parse("-x1"), parse("2*x1 - y1"),
                     BoxRegion{Interval(-1.0, 1.0)},
                     BoxRegion{Interval(-1.0, 1.0)});
}

// Solve the discretized relaxation: minimize the objective over X with one
// pinned constraint per discretization point. An empty discretization means
// the plain box minimization over X.
inline CertifiedMin solve_lbd(const SipInstance& inst, const Discretization& d,
                              const OptConfig& cfg) {
  std::vector<ExprPtr> cuts;
  cuts.reserve(d.size());
  for (const PointVec& p : d.points) {
    if (p.size() != inst.y_dim())
      throw DimensionMismatch("discretization point dimension mismatch");
    cuts.push_back(substitute_y(inst.constraint, p));
  }
  return minimize(inst.objective, inst.x_box, cuts, cfg);
}

// Certified solve of the lower-level program at a fixed x: maximize
// constraint(x, .) over the Y box. incumbent is the best maximizer found and
// lower_bound carries the certified upper bound on the supremum.
inline CertifiedMin llp_certified_max(const SipInstance& inst,
                                      const PointVec& x, const OptConfig& cfg) {
  if (!inst.x_box.contains(x))
    throw Error("lower-level query point lies outside X");
  return maximize(substitute_x(inst.constraint, x), inst.y_box, cfg);
}

}  // namespace sip

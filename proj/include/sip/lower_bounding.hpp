#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sip/instance.hpp"
#include "sip/oracles.hpp"

namespace sip {

enum class SipStatus {
  ConvergedOptimal,
  InfeasibleSIP,
  MaxIterReached,
  SubsolverFailure,
};

inline std::string_view to_string(SipStatus s) {
  switch (s) {
    case SipStatus::ConvergedOptimal: return "converged-optimal";
    case SipStatus::InfeasibleSIP: return "infeasible";
    case SipStatus::MaxIterReached: return "max-iterations";
    case SipStatus::SubsolverFailure: return "subsolver-failure";
  }
  return "unknown";
}

// One iteration of the outer loop. minimizer/oracle are absent only for the
// final record of a run whose relaxation was certified infeasible, or when
// the oracle itself failed.
struct IterationRecord {
  int k = 0;
  std::optional<PointVec> minimizer;
  double lower_bound = -std::numeric_limits<double>::infinity();
  double incumbent_value = std::numeric_limits<double>::infinity();
  std::optional<OracleOutcome> oracle;
};

struct SipConfig {
  double eps_feas = 1e-6;  // threshold for declaring max_y g(x, y) <= 0
  int max_iter = 100;
  OptConfig opt;
  Discretization initial_discretization;

  void validate() const {
    if (!(eps_feas > 0.0)) throw Error("eps_feas must be positive");
    if (max_iter < 1) throw Error("max_iter must be at least 1");
    opt.validate();
  }
};

struct SolveReport {
  SipStatus status = SipStatus::MaxIterReached;
  std::vector<IterationRecord> iterations;
  double final_lower_bound = -std::numeric_limits<double>::infinity();
  std::optional<PointVec> optimal_point;  // present iff ConvergedOptimal
  std::size_t x_dim = 0;
  std::size_t y_dim = 0;
  std::string note;  // diagnostic detail for SubsolverFailure
};

namespace detail {

inline bool near_duplicate(const PointVec& p, const Discretization& d,
                           double tol) {
  for (const PointVec& q : d.points) {
    if (q.size() != p.size()) continue;
    double dist = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
      dist = std::max(dist, std::abs(p[i] - q[i]));
    if (dist <= tol) return true;
  }
  return false;
}

}  // namespace detail

// Iterative lower bounding: solve the discretized relaxation, query the
// oracle at its minimizer, and append the returned violation point to the
// discretization until the oracle certifies feasibility (the minimizer is
// then optimal), the relaxation is certified infeasible (so the instance is),
// or the iteration budget runs out.
//
// Reported bounds come from the rigorous branch-and-bound lower bound of each
// relaxation solve, combined into a running maximum: every per-iteration
// bound is valid for the full instance (the relaxation only omits
// constraints), so the best one so far is reported and the sequence is
// non-decreasing by construction.
inline SolveReport run_lower_bounding(const SipInstance& inst,
                                      const LlpOracle& oracle,
                                      const SipConfig& cfg) {
  cfg.validate();
  const double inf = std::numeric_limits<double>::infinity();

  SolveReport rep;
  rep.x_dim = inst.x_dim();
  rep.y_dim = inst.y_dim();

  Discretization d = cfg.initial_discretization;
  for (const PointVec& p : d.points)
    if (!inst.y_box.contains(p))
      throw Error("initial discretization point lies outside Y");

  double best_bound = -inf;
  for (int k = 1; k <= cfg.max_iter; ++k) {
    const CertifiedMin lbd = solve_lbd(inst, d, cfg.opt);

    if (lbd.status == OptStatus::Infeasible) {
      IterationRecord rec;
      rec.k = k;
      rec.lower_bound = inf;
      rep.iterations.push_back(std::move(rec));
      rep.status = SipStatus::InfeasibleSIP;
      rep.final_lower_bound = inf;
      return rep;
    }
    if (lbd.status == OptStatus::DepthCapReached || !lbd.incumbent) {
      rep.status = SipStatus::SubsolverFailure;
      rep.note = "relaxation solve exhausted its node budget at iteration " +
                 std::to_string(k);
      rep.final_lower_bound = std::max(best_bound, lbd.lower_bound);
      return rep;
    }

    best_bound = std::max(best_bound, lbd.lower_bound);
    IterationRecord rec;
    rec.k = k;
    rec.minimizer = lbd.incumbent;
    rec.lower_bound = best_bound;
    rec.incumbent_value = lbd.incumbent_value;

    OracleOutcome outcome;
    try {
      outcome = oracle.query(inst, *lbd.incumbent, cfg.eps_feas, cfg.opt);
    } catch (const SubsolverError& e) {
      rep.iterations.push_back(std::move(rec));
      rep.status = SipStatus::SubsolverFailure;
      rep.note = std::string("oracle query failed at iteration ") +
                 std::to_string(k) + ": " + e.what();
      rep.final_lower_bound = best_bound;
      return rep;
    }
    rec.oracle = outcome;
    rep.iterations.push_back(std::move(rec));

    if (outcome.feasible()) {
      rep.status = SipStatus::ConvergedOptimal;
      rep.optimal_point = lbd.incumbent;
      rep.final_lower_bound = best_bound;
      return rep;
    }

    const double g_check =
        eval_point(*inst.constraint, VarAssignment{*lbd.incumbent, outcome.y});
    if (!(g_check > 0.0))
      throw OracleContractViolation(
          "oracle returned a claimed violation with g(x, y) = " +
          std::to_string(g_check) + " <= 0 at iteration " + std::to_string(k));
    if (!inst.y_box.contains(outcome.y))
      throw OracleContractViolation(
          "oracle returned a point outside Y at iteration " +
          std::to_string(k));

    if (detail::near_duplicate(outcome.y, d, 1e-12)) {
      rep.status = SipStatus::SubsolverFailure;
      rep.note = "oracle repeated discretization point " +
                 std::to_string(outcome.y[0]) + " at iteration " +
                 std::to_string(k) + "; the relaxation cannot tighten further";
      rep.final_lower_bound = best_bound;
      return rep;
    }
    d.append(outcome.y);
  }

  rep.status = SipStatus::MaxIterReached;
  rep.final_lower_bound = best_bound;
  return rep;
}

}  // namespace sip

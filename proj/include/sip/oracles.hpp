#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sip/instance.hpp"

namespace sip {

// Outcome of one lower-level query at a fixed x: either a certificate that
// max_y g(x, y) <= eps_feas, or a point y in Y with g(x, y) > 0.
struct OracleOutcome {
  enum class Kind { Feasible, Violation };

  Kind kind = Kind::Feasible;
  double certified_max = 0.0;             // Feasible: certified bound on the sup
  PointVec y;                             // Violation
  double g_value = 0.0;                   // Violation: g(x, y), always > 0
  std::optional<double> g_star_estimate;  // Violation: best known sup, if any

  bool feasible() const { return kind == Kind::Feasible; }

  static OracleOutcome make_feasible(double certified) {
    OracleOutcome o;
    o.kind = Kind::Feasible;
    o.certified_max = certified;
    return o;
  }

  static OracleOutcome make_violation(PointVec point, double g,
                                      std::optional<double> estimate) {
    OracleOutcome o;
    o.kind = Kind::Violation;
    o.y = std::move(point);
    o.g_value = g;
    o.g_star_estimate = estimate;
    return o;
  }
};

// Contract for anything the lower-bounding loop may query. eps_feas is the
// loop-level threshold for declaring the queried x feasible. Implementations
// are stateless; queries are pure functions of their arguments.
class LlpOracle {
 public:
  virtual ~LlpOracle() = default;
  virtual OracleOutcome query(const SipInstance& inst, const PointVec& x,
                              double eps_feas, const OptConfig& cfg) const = 0;
  virtual std::string_view name() const = 0;
};

namespace detail {

// Solve the lower-level program, re-solving with tightened eps_obj until
// either feasibility is certified (certified upper bound <= eps_feas) or the
// incumbent is positive with a certified gap no larger than desired_gap(r).
// Certified bounds stay valid even when a solve hits its node cap, so once
// the budget is in sight the loop settles for any completed result whose gap
// still satisfies required_gap(r); only if even that fails does it give up.
template <typename DesiredFn, typename RequiredFn>
inline CertifiedMin solve_llp_refined(const SipInstance& inst,
                                      const PointVec& x, double eps_feas,
                                      OptConfig cfg, DesiredFn desired_gap,
                                      RequiredFn required_gap) {
  for (int round = 0; round < 24; ++round) {
    const CertifiedMin r = llp_certified_max(inst, x, cfg);
    const bool capped = r.status == OptStatus::DepthCapReached;
    const double upper = r.lower_bound;  // certified upper bound on the sup
    if (upper <= eps_feas) return r;
    const bool positive = r.incumbent && r.incumbent_value > 0.0;
    const double gap = upper - r.incumbent_value;
    if (positive && gap <= desired_gap(r)) return r;
    if ((capped || r.nodes >= cfg.max_nodes / 8) && positive &&
        gap <= required_gap(r))
      return r;
    if (capped || cfg.eps_obj <= 1e-15)
      throw SubsolverError("lower-level solve exhausted its node budget");
    // head roughly for the gap we still need instead of overshooting it
    double next = cfg.eps_obj / 16.0;
    if (positive) {
      const double scale = std::max(1.0, std::abs(r.incumbent_value));
      next = std::max(next, std::min(desired_gap(r) / (2.0 * scale),
                                     cfg.eps_obj / 4.0));
    }
    cfg.eps_obj = std::max(next, 1e-15);
  }
  throw SubsolverError("lower-level refinement did not converge");
}

}  // namespace detail

// Resolves the lower-level program outright: certifies feasibility, or
// returns the best maximizer found together with its constraint value.
class ExactOracle final : public LlpOracle {
 public:
  OracleOutcome query(const SipInstance& inst, const PointVec& x,
                      double eps_feas, const OptConfig& cfg) const override {
    // require the incumbent to carry at least half the certified bound so a
    // returned cut always bites by a margin above the incumbent band
    const auto half_bound = [](const CertifiedMin& s) {
      return 0.5 * s.lower_bound;
    };
    const CertifiedMin r =
        detail::solve_llp_refined(inst, x, eps_feas, cfg, half_bound,
                                  half_bound);
    if (r.lower_bound <= eps_feas)
      return OracleOutcome::make_feasible(r.lower_bound);
    PointVec y = *r.incumbent;
    const double g = eval_point(*inst.constraint, VarAssignment{x, y});
    return OracleOutcome::make_violation(std::move(y), g, r.incumbent_value);
  }

  std::string_view name() const override { return "exact"; }
};

struct AlphaConfig {
  double alpha;
  double value_tol;

  explicit AlphaConfig(double alpha_in, double value_tol_in = 1e-9)
      : alpha(alpha_in), value_tol(value_tol_in) {
    if (!(alpha > 0.0 && alpha < 1.0))
      throw Error("alpha must lie strictly inside (0, 1)");
    if (!(value_tol > 0.0)) throw Error("value_tol must be positive");
  }
};

// Worst-case compliant oracle: when x is infeasible it does not return the
// maximizer but a point whose violation is only the fraction alpha of the
// certified maximum violation, located by bisecting between the weakest
// corner of Y and the maximizer. Exercises the boundary of the convergence
// condition g(x, y) >= alpha * g*(x) > 0.
class AlphaOracle final : public LlpOracle {
 public:
  explicit AlphaOracle(AlphaConfig acfg) : acfg_(acfg) {}

  OracleOutcome query(const SipInstance& inst, const PointVec& x,
                      double eps_feas, const OptConfig& cfg) const override {
    const double vt = acfg_.value_tol;
    const double alpha = acfg_.alpha;
    // tight enough that alpha * upper stays reachable and within
    // O(value_tol) of alpha * sup; reachability alone is the hard floor
    const auto reachable = [alpha](const CertifiedMin& s) {
      return 0.5 * (1.0 / alpha - 1.0) * s.incumbent_value;
    };
    const CertifiedMin r = detail::solve_llp_refined(
        inst, x, eps_feas, cfg,
        [&](const CertifiedMin& s) {
          return std::min(vt * std::max(1.0, std::abs(s.incumbent_value)),
                          reachable(s));
        },
        reachable);
    if (r.lower_bound <= eps_feas)
      return OracleOutcome::make_feasible(r.lower_bound);

    const double g_star_inc = r.incumbent_value;
    const double target = alpha * r.lower_bound;  // >= alpha * true sup
    const ExprPtr g_at_x = substitute_x(inst.constraint, x);
    auto g_at = [&](const PointVec& y) {
      return eval_point(*g_at_x, VarAssignment{PointVec{}, y});
    };

    // anchor: the corner of Y with the smallest constraint value
    PointVec anchor = PointVec(inst.y_box.corner(0));
    double g_anchor = g_at(anchor);
    for (std::uint64_t m = 1; m < inst.y_box.corner_count(); ++m) {
      PointVec c = PointVec(inst.y_box.corner(m));
      const double v = g_at(c);
      if (v < g_anchor) {
        g_anchor = v;
        anchor = std::move(c);
      }
    }
    if (g_anchor >= target)
      return OracleOutcome::make_violation(std::move(anchor), g_anchor,
                                           g_star_inc);

    // g is continuous along the segment from the anchor to the maximizer and
    // spans [g_anchor, incumbent] with g_anchor < target <= incumbent, so
    // bisection localizes a point with g in [target, target + value_tol]
    const PointVec& peak = *r.incumbent;
    if (!(g_star_inc >= target))
      throw SubsolverError("degraded target exceeds the incumbent violation");
    auto at = [&](double s) {
      std::vector<double> c(anchor.size());
      for (std::size_t i = 0; i < c.size(); ++i)
        c[i] = anchor[i] + s * (peak[i] - anchor[i]);
      return clamp_to_box(PointVec(std::move(c)), inst.y_box);
    };
    double s_lo = 0.0;
    double s_hi = 1.0;
    PointVec y_hi = peak;
    double g_hi = g_at(y_hi);
    for (int step = 0; step < 200; ++step) {
      if (g_hi <= target + vt)
        return OracleOutcome::make_violation(std::move(y_hi), g_hi,
                                             g_star_inc);
      const double s_mid = 0.5 * (s_lo + s_hi);
      PointVec y_mid = at(s_mid);
      const double g_mid = g_at(y_mid);
      if (g_mid >= target) {
        s_hi = s_mid;
        y_hi = std::move(y_mid);
        g_hi = g_mid;
      } else {
        s_lo = s_mid;
      }
    }
    throw Error("alpha oracle: bisection failed on a continuous constraint");
  }

  const AlphaConfig& config() const { return acfg_; }
  std::string_view name() const override { return "alpha"; }

 private:
  AlphaConfig acfg_;
};

// Fixed affine rule y = clamp(A x + b, Y).
struct AffineMap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> entries;  // row-major, rows x cols
  std::vector<double> offset;   // rows

  AffineMap(std::size_t rows_in, std::size_t cols_in,
            std::vector<double> entries_in, std::vector<double> offset_in)
      : rows(rows_in),
        cols(cols_in),
        entries(std::move(entries_in)),
        offset(std::move(offset_in)) {
    if (entries.size() != rows * cols || offset.size() != rows)
      throw DimensionMismatch("affine map entry/offset sizes do not match");
  }

  static AffineMap identity(std::size_t n) {
    std::vector<double> e(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) e[i * n + i] = 1.0;
    return AffineMap(n, n, std::move(e), std::vector<double>(n, 0.0));
  }

  PointVec apply(const PointVec& x) const {
    if (x.size() != cols)
      throw DimensionMismatch("affine map expects a " + std::to_string(cols) +
                              "-dim input");
    std::vector<double> out(rows);
    for (std::size_t i = 0; i < rows; ++i) {
      double v = offset[i];
      for (std::size_t j = 0; j < cols; ++j) v += entries[i * cols + j] * x[j];
      out[i] = v;
    }
    return PointVec(std::move(out));
  }
};

// Scripted oracle: proposes y = clamp(A x + b) and reports it whenever it
// witnesses any positive violation, no matter how small; otherwise defers to
// the exact oracle. Every answer therefore satisfies the letter of the
// violation contract while the proposals can keep the violations vanishing.
class ScriptedOracle final : public LlpOracle {
 public:
  explicit ScriptedOracle(AffineMap map) : map_(std::move(map)) {}

  OracleOutcome query(const SipInstance& inst, const PointVec& x,
                      double eps_feas, const OptConfig& cfg) const override {
    if (map_.rows != inst.y_dim() || map_.cols != inst.x_dim())
      throw DimensionMismatch("affine map shape does not match the instance");
    PointVec y = clamp_to_box(map_.apply(x), inst.y_box);
    const double g = eval_point(*inst.constraint, VarAssignment{x, y});
    if (g > 0.0)
      return OracleOutcome::make_violation(std::move(y), g, std::nullopt);
    return fallback_.query(inst, x, eps_feas, cfg);
  }

  const AffineMap& map() const { return map_; }
  std::string_view name() const override { return "scripted"; }

 private:
  AffineMap map_;
  ExactOracle fallback_;
};

}  // namespace sip

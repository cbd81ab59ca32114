#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "sip/lower_bounding.hpp"
#include "test_util.hpp"

using namespace sip;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

// Canned oracle for exercising loop edge cases.
class CannedOracle final : public LlpOracle {
 public:
  explicit CannedOracle(PointVec y) : y_(std::move(y)) {}
  OracleOutcome query(const SipInstance& inst, const PointVec& x, double,
                      const OptConfig&) const override {
    const double g = eval_point(*inst.constraint, VarAssignment{x, y_});
    return OracleOutcome::make_violation(y_, g, std::nullopt);
  }
  std::string_view name() const override { return "canned"; }

 private:
  PointVec y_;
};

}  // namespace

TEST_CASE("builtin counterexample definition") {
  const SipInstance inst = builtin_counterexample();
  CHECK(inst.name == "cex");
  CHECK(eval_point(*inst.objective, VarAssignment{{1.0}, {}}) == -1.0);
  CHECK(eval_point(*inst.constraint, VarAssignment{{1.0}, {1.0}}) == 1.0);
  CHECK(inst.x_box == BoxRegion{Interval(-1.0, 1.0)});
  CHECK(inst.y_box == BoxRegion{Interval(-1.0, 1.0)});

  // the instance's exact optimum, via the independent grid reference
  const double f_star = testutil::grid_sip_optimum(inst, 1001, 1001);
  CHECK(f_star == 0.5);
  // grid feasibility matches the closed form [-1, -1/2]
  CHECK(testutil::grid_llp_max(inst, PointVec{-0.5}, 1001) == 0.0);
  CHECK(testutil::grid_llp_max(inst, PointVec{-0.4}, 1001) > 0.0);
}

TEST_CASE("instance validation") {
  CHECK_THROWS_AS(SipInstance("bad", parse("y1"), parse("x1 - y1"),
                              BoxRegion{Interval(0.0, 1.0)},
                              BoxRegion{Interval(0.0, 1.0)}),
                  Error);
  CHECK_THROWS_AS(SipInstance("bad", parse("x2"), parse("x1 - y1"),
                              BoxRegion{Interval(0.0, 1.0)},
                              BoxRegion{Interval(0.0, 1.0)}),
                  Error);
  CHECK_THROWS_AS(SipInstance("bad", parse("x1"), parse("x1 - y2"),
                              BoxRegion{Interval(0.0, 1.0)},
                              BoxRegion{Interval(0.0, 1.0)}),
                  Error);
}

TEST_CASE("relaxation solves against growing discretizations") {
  const SipInstance inst = builtin_counterexample();
  const OptConfig cfg;

  Discretization d;
  auto r = solve_lbd(inst, d, cfg);
  CHECK((*r.incumbent)[0] == 1.0);
  CHECK(r.incumbent_value == -1.0);

  d.append(PointVec{1.0});
  r = solve_lbd(inst, d, cfg);
  CHECK((*r.incumbent)[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(r.incumbent_value == doctest::Approx(-0.5).epsilon(1e-6));

  d.append(PointVec{0.5});
  r = solve_lbd(inst, d, cfg);
  CHECK((*r.incumbent)[0] == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(r.incumbent_value == doctest::Approx(-0.25).epsilon(1e-6));
}

TEST_CASE("lower-level solve certifies the violation maximum") {
  const SipInstance inst = builtin_counterexample();
  const OptConfig cfg;

  auto r = llp_certified_max(inst, PointVec{1.0}, cfg);
  CHECK(r.incumbent_value == 3.0);
  CHECK((*r.incumbent)[0] == -1.0);
  CHECK(r.lower_bound >= 3.0);

  r = llp_certified_max(inst, PointVec{-0.5}, cfg);
  CHECK(r.incumbent_value == doctest::Approx(0.0).epsilon(1e-9));

  r = llp_certified_max(inst, PointVec{-1.0}, cfg);
  CHECK(r.incumbent_value == doctest::Approx(-1.0).epsilon(1e-9));

  CHECK_THROWS_AS(llp_certified_max(inst, PointVec{2.0}, cfg), Error);
}

TEST_CASE("exact oracle converges in two iterations on the counterexample") {
  const SipInstance inst = builtin_counterexample();
  const ExactOracle oracle;
  SipConfig cfg;
  const SolveReport rep = run_lower_bounding(inst, oracle, cfg);

  REQUIRE(rep.status == SipStatus::ConvergedOptimal);
  REQUIRE(rep.iterations.size() == 2);
  CHECK(std::abs(rep.final_lower_bound - 0.5) <= 1e-4);
  REQUIRE(rep.optimal_point.has_value());
  CHECK((*rep.optimal_point)[0] == doctest::Approx(-0.5).epsilon(1e-6));

  // first iteration: minimizer 1, violation at y = -1 with g = 3
  const IterationRecord& first = rep.iterations[0];
  CHECK((*first.minimizer)[0] == 1.0);
  REQUIRE(first.oracle.has_value());
  CHECK_FALSE(first.oracle->feasible());
  CHECK(std::abs(first.oracle->y[0] - (-1.0)) <= 1e-6);
  CHECK(first.oracle->g_value == doctest::Approx(3.0).epsilon(1e-9));

  // second iteration certifies feasibility
  const IterationRecord& second = rep.iterations[1];
  REQUIRE(second.oracle.has_value());
  CHECK(second.oracle->feasible());
  CHECK(second.oracle->certified_max <= cfg.eps_feas);

  // cross-check the reported optimum against the grid reference
  const double f_star = testutil::grid_sip_optimum(inst, 1001, 1001);
  CHECK(rep.final_lower_bound <= f_star + 1e-3);

  // termination correctness: re-certify the lower level at the answer
  const auto recheck = llp_certified_max(inst, *rep.optimal_point, cfg.opt);
  CHECK(recheck.lower_bound <= 2.0 * cfg.eps_feas);
}

TEST_CASE("scripted oracle reproduces the halving trajectory") {
  const SipInstance inst = builtin_counterexample();
  const ScriptedOracle oracle(AffineMap::identity(1));
  SipConfig cfg;
  cfg.max_iter = 12;
  const SolveReport rep = run_lower_bounding(inst, oracle, cfg);

  CHECK(rep.status == SipStatus::MaxIterReached);
  REQUIRE(rep.iterations.size() == 12);
  for (const IterationRecord& rec : rep.iterations) {
    const double expected = -std::pow(2.0, -(rec.k - 1));
    CHECK(std::abs(rec.lower_bound - expected) <= 1e-4);
    CHECK(rec.lower_bound <= 0.0);
    REQUIRE(rec.oracle.has_value());
    CHECK_FALSE(rec.oracle->feasible());
    CHECK_FALSE(rec.oracle->g_star_estimate.has_value());
  }
  // the stalled bound stays strictly below the true optimum 0.5
  CHECK(rep.final_lower_bound <= 1e-3);
  CHECK(rep.final_lower_bound < 0.5);
}

TEST_CASE("alpha oracle tracks the degraded recursion") {
  const SipInstance inst = builtin_counterexample();
  const AlphaOracle oracle(AlphaConfig(0.5));
  SipConfig cfg;
  cfg.max_iter = 60;
  const SolveReport rep = run_lower_bounding(inst, oracle, cfg);

  const bool converged = rep.status == SipStatus::ConvergedOptimal;
  const bool close = std::abs(rep.final_lower_bound - 0.5) <= 1e-3;
  CHECK((converged || close));

  const auto xs =
      testutil::alpha_trajectory(0.5, static_cast<int>(rep.iterations.size()));
  for (const IterationRecord& rec : rep.iterations) {
    if (rec.k < 2) continue;
    CHECK(std::abs(rec.lower_bound -
                   (-xs[static_cast<std::size_t>(rec.k - 1)])) <= 1e-4);
  }
}

TEST_CASE("bounds are monotone and the discretization grows by one") {
  const SipInstance inst = builtin_counterexample();
  const ScriptedOracle oracle(AffineMap::identity(1));
  SipConfig cfg;
  cfg.max_iter = 10;
  const SolveReport rep = run_lower_bounding(inst, oracle, cfg);

  for (std::size_t i = 1; i < rep.iterations.size(); ++i)
    CHECK(rep.iterations[i].lower_bound >=
          rep.iterations[i - 1].lower_bound - 1e-9);
  // every iteration of this run ends in a violation, so the discretization
  // must have grown by exactly one point per iteration: replaying the
  // returned points as the initial discretization reproduces iteration k+1
  Discretization replay;
  for (const IterationRecord& rec : rep.iterations)
    replay.append(rec.oracle->y);
  CHECK(replay.size() == rep.iterations.size());
  const auto next = solve_lbd(inst, replay, cfg.opt);
  CHECK(next.incumbent_value >= rep.iterations.back().lower_bound - 1e-9);
}

TEST_CASE("infeasible relaxation certifies an infeasible instance") {
  // g = x1 + y1 + 10 > 0 everywhere on the boxes
  const SipInstance inst("always-violated", parse("x1"),
                         parse("x1 + y1 + 10"), BoxRegion{Interval(-1.0, 1.0)},
                         BoxRegion{Interval(-1.0, 1.0)});
  const ExactOracle oracle;
  SipConfig cfg;
  const SolveReport rep = run_lower_bounding(inst, oracle, cfg);

  CHECK(rep.status == SipStatus::InfeasibleSIP);
  CHECK(rep.final_lower_bound == kInf);
  REQUIRE(rep.iterations.size() == 2);  // k=1 adds a cut, k=2 is infeasible
  CHECK(rep.iterations.back().lower_bound == kInf);
  CHECK_FALSE(rep.iterations.back().minimizer.has_value());
  CHECK_FALSE(rep.optimal_point.has_value());
}

TEST_CASE("oracle contract violations are rejected") {
  const SipInstance inst = builtin_counterexample();
  // always returns y = -1; at the second minimizer x = -1/2 the claimed
  // violation has g = 0, which breaches the contract
  const CannedOracle oracle(PointVec{-1.0});
  SipConfig cfg;
  CHECK_THROWS_AS(run_lower_bounding(inst, oracle, cfg),
                  OracleContractViolation);
}

TEST_CASE("a repeated discretization point fails loudly") {
  const SipInstance inst = builtin_counterexample();
  // y* = -1e-9 in the initial discretization; the relaxation minimizer is
  // x = 0 where g(0, y*) = 1e-9 is a genuine (tiny) violation, and the
  // canned oracle returns the same y* again
  SipConfig cfg;
  cfg.initial_discretization.append(PointVec{-1e-9});
  const CannedOracle oracle(PointVec{-1e-9});
  const SolveReport rep = run_lower_bounding(inst, oracle, cfg);
  CHECK(rep.status == SipStatus::SubsolverFailure);
  CHECK(rep.note.find("repeated") != std::string::npos);
}

TEST_CASE("reports carry instance dimensions") {
  const SipInstance inst = builtin_counterexample();
  const ExactOracle oracle;
  const SolveReport rep = run_lower_bounding(inst, oracle, SipConfig{});
  CHECK(rep.x_dim == 1);
  CHECK(rep.y_dim == 1);
}

TEST_CASE("repeated runs are bit-identical") {
  const SipInstance inst = builtin_counterexample();
  const AlphaOracle oracle(AlphaConfig(0.7));
  SipConfig cfg;
  cfg.max_iter = 40;
  const SolveReport a = run_lower_bounding(inst, oracle, cfg);
  const SolveReport b = run_lower_bounding(inst, oracle, cfg);

  CHECK(a.status == b.status);
  CHECK(a.final_lower_bound == b.final_lower_bound);
  REQUIRE(a.iterations.size() == b.iterations.size());
  for (std::size_t i = 0; i < a.iterations.size(); ++i) {
    CHECK(a.iterations[i].lower_bound == b.iterations[i].lower_bound);
    CHECK(a.iterations[i].incumbent_value == b.iterations[i].incumbent_value);
    CHECK(*a.iterations[i].minimizer == *b.iterations[i].minimizer);
    if (!a.iterations[i].oracle->feasible())
      CHECK(a.iterations[i].oracle->y == b.iterations[i].oracle->y);
  }
}

TEST_CASE("initial discretization must live inside Y") {
  const SipInstance inst = builtin_counterexample();
  SipConfig cfg;
  cfg.initial_discretization.append(PointVec{2.0});
  CHECK_THROWS_AS(run_lower_bounding(inst, ExactOracle{}, cfg), Error);
}

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gaswarm/milp/model.hpp"
#include "gaswarm/milp/simplex.hpp"
#include "support/log_capture.hpp"

using namespace gaswarm::milp;

namespace {

SolveParams exact_params() {
  SolveParams p;
  p.mip_gap_abs = 1e-9;
  p.mip_gap_rel = 1e-12;
  return p;
}

// Small random MILP: binaries in the Auxiliary block, continuous in x1,
// rows built around a random feasible point so every instance is feasible.
ParametricMilp random_milp(std::mt19937_64& rng, int binaries, int continuous, int rows) {
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ParametricMilp m;
  std::vector<double> anchor;
  for (int i = 0; i < binaries; ++i) {
    m.add_variable("z" + std::to_string(i), 0, 1, Block::Auxiliary);
    anchor.push_back(unit(rng) < 0.5 ? 0.0 : 1.0);
  }
  for (int i = 0; i < continuous; ++i) {
    m.add_variable("x" + std::to_string(i), 0, 10, Block::Continuous);
    anchor.push_back(10.0 * unit(rng));
  }
  const int n = binaries + continuous;
  for (int r = 0; r < rows; ++r) {
    std::vector<Term> terms;
    double act = 0.0;
    for (int j = 0; j < n; ++j) {
      if (unit(rng) < 0.4) continue;
      const double c = std::round(coef(rng) * 4.0) / 4.0;
      terms.push_back({j, c});
      act += c * anchor[j];
    }
    const double pick = unit(rng);
    if (pick < 0.45) m.add_row("r" + std::to_string(r), terms, Sense::LessEqual, act + 2.0 * unit(rng));
    else if (pick < 0.9) m.add_row("r" + std::to_string(r), terms, Sense::GreaterEqual, act - 2.0 * unit(rng));
    else m.add_row("r" + std::to_string(r), terms, Sense::Equal, act);
  }
  for (int j = 0; j < n; ++j) m.set_objective(j, coef(rng));
  return m;
}

double enumerate_optimum(const ParametricMilp& model) {
  std::vector<int> ints;
  for (std::size_t j = 0; j < model.num_variables(); ++j)
    if (model.variable(static_cast<int>(j)).integral) ints.push_back(static_cast<int>(j));
  double best = kInf;
  for (std::uint32_t mask = 0; mask < (1u << ints.size()); ++mask) {
    ParametricMilp fixed = model;
    for (std::size_t k = 0; k < ints.size(); ++k) {
      const double v = (mask >> k) & 1u;
      fixed.set_bounds(ints[k], v, v);
    }
    const MilpResult r = solve_lp(fixed);
    if (r.status == SolveStatus::Optimal) best = std::min(best, r.objective);
  }
  return best;
}

}  // namespace

TEST(FixBinaries, FixesBoundsOfAssignedDecisions) {
  ParametricMilp m;
  m.add_variable("m_a", 0, 1, Block::Decision);
  m.add_variable("x", 0, 5, Block::Continuous);
  const ParametricMilp fixed = fix_binaries(m, {{"m_a", 1}});
  EXPECT_EQ(fixed.variable(0).lower, 1.0);
  EXPECT_EQ(fixed.variable(0).upper, 1.0);
  EXPECT_EQ(fixed.variable(1).upper, 5.0);
  EXPECT_TRUE(fixed.decisions_fixed());
  EXPECT_FALSE(m.decisions_fixed());
}

TEST(FixBinaries, RejectsUnknownAndPartialAssignments) {
  ParametricMilp m;
  m.add_variable("m_a", 0, 1, Block::Decision);
  m.add_variable("m_b", 0, 1, Block::Decision);
  m.add_variable("aux", 0, 1, Block::Auxiliary);
  EXPECT_THROW((void)fix_binaries(m, {{"m_a", 1}, {"aux", 0}, {"m_b", 0}}), UnknownVariable);
  EXPECT_THROW((void)fix_binaries(m, {{"nope", 1}, {"m_a", 1}, {"m_b", 0}}), UnknownVariable);
  EXPECT_THROW((void)fix_binaries(m, {{"m_a", 1}}), PartialAssignment);
}

TEST(FixBinaries, FullyFixedModelIsSolvableAsLp) {
  ParametricMilp m;
  const int a = m.add_variable("m_a", 0, 1, Block::Decision);
  const int x = m.add_variable("x", 0, 10, Block::Continuous);
  m.add_row("link", {{x, 1.0}, {a, -3.0}}, Sense::GreaterEqual, 0.0);
  m.set_objective(x, 1.0);
  EXPECT_THROW((void)solve_lp(m), FreeIntegerPresent);
  const MilpResult r = solve_lp(fix_binaries(m, {{"m_a", 1}}));
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_NEAR(r.objective, 3.0, 1e-9);
}

TEST(SolveLp, SingleVariableLowerRow) {
  ParametricMilp m;
  const int x = m.add_variable("x", 0, 10, Block::Continuous);
  m.add_row("c", {{x, 1.0}}, Sense::GreaterEqual, 1.0);
  m.set_objective(x, 1.0);
  const MilpResult r = solve_lp(m);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_NEAR(r.objective, 1.0, 1e-7);
  EXPECT_TRUE(validate_solution(m, r.point, 1e-6).feasible());
}

TEST(SolveLp, VertexOnTheFace) {
  ParametricMilp m;
  const int x = m.add_variable("x", 0, kInf, Block::Continuous);
  const int y = m.add_variable("y", 0, kInf, Block::Continuous);
  m.add_row("c", {{x, 1.0}, {y, 1.0}}, Sense::LessEqual, 1.0);
  m.set_objective(x, -1.0);
  m.set_objective(y, -1.0);
  const MilpResult r = solve_lp(m);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_NEAR(r.objective, -1.0, 1e-7);
  // a vertex: one coordinate at a bound
  EXPECT_TRUE(std::abs(r.point[x]) < 1e-9 || std::abs(r.point[y]) < 1e-9);
}

TEST(SolveLp, ContradictoryRowsAreInfeasible) {
  ParametricMilp m;
  const int x = m.add_variable("x", -kInf, kInf, Block::Continuous);
  m.add_row("lo", {{x, 1.0}}, Sense::GreaterEqual, 2.0);
  m.add_row("hi", {{x, 1.0}}, Sense::LessEqual, 1.0);
  EXPECT_EQ(solve_lp(m).status, SolveStatus::Infeasible);
}

TEST(SolveLp, UnboundedRay) {
  ParametricMilp m;
  const int x = m.add_variable("x", 0, kInf, Block::Continuous);
  const int y = m.add_variable("y", -kInf, kInf, Block::Continuous);
  m.add_row("c", {{x, 1.0}, {y, -1.0}}, Sense::LessEqual, 3.0);
  m.set_objective(x, -1.0);
  m.add_row("d", {{y, 1.0}}, Sense::GreaterEqual, -2.0);
  EXPECT_EQ(solve_lp(m).status, SolveStatus::Unbounded);
}

TEST(SolveLp, FreeVariablesAndEqualities) {
  // min |x - 3| written with a free x and two auxiliaries
  ParametricMilp m;
  const int x = m.add_variable("x", -kInf, kInf, Block::Continuous);
  const int p = m.add_variable("p", 0, kInf, Block::Slack);
  const int n = m.add_variable("n", 0, kInf, Block::Slack);
  m.add_row("def", {{x, 1.0}, {p, -1.0}, {n, 1.0}}, Sense::Equal, 3.0);
  m.add_row("cap", {{x, 1.0}}, Sense::LessEqual, 1.5);
  m.set_objective(p, 1.0);
  m.set_objective(n, 1.0);
  const MilpResult r = solve_lp(m);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_NEAR(r.objective, 1.5, 1e-9);
  EXPECT_NEAR(r.point[x], 1.5, 1e-9);
}

TEST(SolveLp, DualBoundMatchesPrimalOnRandomLps) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    ParametricMilp m = random_milp(rng, 0, 6, 5);
    const MilpResult r = solve_lp(m);
    ASSERT_EQ(r.status, SolveStatus::Optimal);
    ASSERT_TRUE(r.dual_bound.has_value());
    EXPECT_NEAR(*r.dual_bound, r.objective, 1e-6);
    EXPECT_TRUE(validate_solution(m, r.point, 1e-6).feasible());
  }
}

TEST(SimplexEngine, WarmResolveAfterBoundChangeMatchesColdSolve) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    ParametricMilp m = random_milp(rng, 0, 6, 6);
    SimplexEngine warm(m);
    ASSERT_EQ(warm.solve().status, LpStatus::Optimal);
    for (int step = 0; step < 6; ++step) {
      const int var = step % 6;
      const double hi = 1.0 + step;
      warm.set_bounds(var, 0.0, hi);
      ParametricMilp tightened = m;
      tightened.set_bounds(var, 0.0, hi);
      const LpSolution a = warm.solve();
      const MilpResult b = solve_lp(tightened);
      ASSERT_EQ(a.status == LpStatus::Optimal, b.status == SolveStatus::Optimal);
      if (b.status == SolveStatus::Optimal) EXPECT_NEAR(a.objective, b.objective, 1e-7);
      warm.restore_bounds(var);
    }
  }
}

TEST(SolveMilp, TwoBinaryPacking) {
  ParametricMilp m;
  const int x = m.add_variable("x", 0, 1, Block::Auxiliary);
  const int y = m.add_variable("y", 0, 1, Block::Auxiliary);
  m.add_row("pack", {{x, 1.0}, {y, 1.0}}, Sense::LessEqual, 1.0);
  m.set_objective(x, -1.0);
  m.set_objective(y, -2.0);
  const MilpResult r = solve_milp(m, SolveParams{});
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_NEAR(r.objective, -2.0, 1e-9);
  EXPECT_NEAR(r.point[x], 0.0, 1e-9);
  EXPECT_NEAR(r.point[y], 1.0, 1e-9);
}

TEST(SolveMilp, KnapsackMatchesEnumerationAndHintPrunes) {
  ParametricMilp m;
  const int a = m.add_variable("a", 0, 1, Block::Auxiliary);
  const int b = m.add_variable("b", 0, 1, Block::Auxiliary);
  const int c = m.add_variable("c", 0, 1, Block::Auxiliary);
  m.add_row("cap", {{a, 2.0}, {b, 3.0}, {c, 1.0}}, Sense::LessEqual, 3.0);
  m.set_objective(a, -5.0);
  m.set_objective(b, -4.0);
  m.set_objective(c, -3.0);

  double best = kInf;
  std::vector<double> arg;
  for (int mask = 0; mask < 8; ++mask) {
    const double va = mask & 1, vb = (mask >> 1) & 1, vc = (mask >> 2) & 1;
    if (2 * va + 3 * vb + vc > 3) continue;
    const double obj = -(5 * va + 4 * vb + 3 * vc);
    if (obj < best) {
      best = obj;
      arg = {va, vb, vc};
    }
  }
  const MilpResult cold = solve_milp(m, exact_params());
  ASSERT_EQ(cold.status, SolveStatus::Optimal);
  EXPECT_NEAR(cold.objective, best, 1e-9);

  const MilpResult warm = solve_milp(m, exact_params(), arg);
  EXPECT_EQ(warm.hint, HintStatus::Accepted);
  EXPECT_NEAR(warm.objective, best, 1e-9);
  EXPECT_LE(warm.node_count, cold.node_count);
  EXPECT_EQ(warm.incumbent_source, IncumbentSource::WarmStartAccepted);
}

TEST(SolveMilp, InfeasibleHintIsDiscarded) {
  LogCapture log;
  ParametricMilp m;
  const int x = m.add_variable("x", 0, 1, Block::Auxiliary);
  const int y = m.add_variable("y", 0, 1, Block::Auxiliary);
  m.add_row("pack", {{x, 1.0}, {y, 1.0}}, Sense::LessEqual, 1.0);
  m.set_objective(x, -1.0);
  m.set_objective(y, -2.0);
  const MilpResult r = solve_milp(m, SolveParams{}, std::vector<double>{1.0, 1.0});
  EXPECT_EQ(r.hint, HintStatus::Rejected);
  EXPECT_EQ(r.status, SolveStatus::Optimal);
  EXPECT_EQ(r.incumbent_source, IncumbentSource::BranchAndBound);
  EXPECT_NEAR(r.objective, -2.0, 1e-9);
  EXPECT_TRUE(log.contains("hint is infeasible"));
}

TEST(SolveMilp, OracleEquivalenceOnRandomModels) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 30; ++trial) {
    const int bins = 2 + trial % 7;
    ParametricMilp m = random_milp(rng, bins, 3, 5);
    const double brute = enumerate_optimum(m);
    const MilpResult r = solve_milp(m, exact_params());
    ASSERT_EQ(r.status, SolveStatus::Optimal) << "trial " << trial;
    EXPECT_NEAR(r.objective, brute, 1e-6) << "trial " << trial;
    EXPECT_TRUE(validate_solution(m, r.point, 1e-6).feasible());
  }
}

TEST(SolveMilp, WarmStartDominanceAndDeterminism) {
  std::mt19937_64 rng(99);
  SolveParams params;
  for (int trial = 0; trial < 15; ++trial) {
    ParametricMilp m = random_milp(rng, 6, 3, 5);
    const MilpResult cold = solve_milp(m, params);
    ASSERT_TRUE(cold.has_solution());
    const MilpResult again = solve_milp(m, params);
    EXPECT_EQ(again.objective, cold.objective);
    EXPECT_EQ(again.node_count, cold.node_count);
    EXPECT_EQ(again.point, cold.point);

    const MilpResult warm = solve_milp(m, params, cold.point);
    EXPECT_LE(warm.objective, m.evaluate_objective(cold.point) + params.mip_gap_abs);
    EXPECT_LE(warm.node_count, cold.node_count);
  }
}

TEST(SolveMilp, TimeLimitReturnsFlag) {
  std::mt19937_64 rng(5);
  ParametricMilp m = random_milp(rng, 8, 3, 5);
  SolveParams p;
  p.time_limit_s = 0.0;
  const MilpResult r = solve_milp(m, p);
  EXPECT_TRUE(r.hit_time_limit);
  EXPECT_EQ(r.status, SolveStatus::Infeasible);
}

TEST(Validate, ReportsViolatedRowWithMagnitude) {
  ParametricMilp m;
  const int x = m.add_variable("x", 0, 10, Block::Continuous);
  m.add_row("atleast", {{x, 1.0}}, Sense::GreaterEqual, 1.0);
  const ValidationReport rep = validate_solution(m, {0.5}, 1e-6);
  ASSERT_EQ(rep.rows.size(), 1u);
  EXPECT_EQ(rep.rows[0].row, 0);
  EXPECT_NEAR(rep.rows[0].violation, 0.5, 1e-12);
  EXPECT_FALSE(rep.feasible());
  EXPECT_TRUE(validate_solution(m, {1.0}, 1e-6).feasible());
}

TEST(Validate, FlagsFractionalBinaries) {
  ParametricMilp m;
  m.add_variable("z", 0, 1, Block::Auxiliary);
  const ValidationReport rep = validate_solution(m, {0.4}, 1e-6);
  ASSERT_EQ(rep.integrality.size(), 1u);
  EXPECT_NEAR(rep.worst_violation, 0.4, 1e-12);
}

TEST(ModelDump, ListsRowsBoundsAndBinaries) {
  ParametricMilp m;
  const int x = m.add_variable("x", 0, 10, Block::Continuous);
  const int z = m.add_variable("z", 0, 1, Block::Decision);
  m.add_row("link", {{x, 1.0}, {z, -4.0}}, Sense::LessEqual, 0.0);
  m.set_objective(x, 2.0);
  const std::string text = to_lp_string(m);
  EXPECT_NE(text.find("obj: 2 x"), std::string::npos);
  EXPECT_NE(text.find("link: x - 4 z <= 0"), std::string::npos);
  EXPECT_NE(text.find("Binaries\n z"), std::string::npos);
}

TEST(ModelInvariants, RejectNegativeSlackCostAndBadRows) {
  ParametricMilp m;
  const int s = m.add_variable("s", 0, kInf, Block::Slack);
  m.set_objective(s, -1.0);
  EXPECT_THROW(m.check_invariants(), InvalidModel);
  EXPECT_THROW(m.add_row("bad", {{5, 1.0}}, Sense::Equal, 0.0), InvalidModel);
  EXPECT_THROW(m.add_variable("s", 0, 1, Block::Continuous), InvalidModel);
  EXPECT_THROW((void)m.index("missing"), UnknownVariable);
}

#include <chrono>
#include <cmath>
#include <queue>

#include "gaswarm/log.hpp"
#include "gaswarm/milp/model.hpp"
#include "gaswarm/milp/simplex.hpp"

namespace gaswarm::milp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Node {
  double bound;
  std::uint64_t seq;
  std::vector<std::pair<int, double>> fixes;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    return a.seq > b.seq;
  }
};

double allowed_gap(const SolveParams& p, double incumbent) {
  return std::max(p.mip_gap_abs, p.mip_gap_rel * std::abs(incumbent));
}

}  // namespace

MilpResult solve_lp(const ParametricMilp& model, double feasibility_tol) {
  for (const VariableDef& v : model.variables())
    if (v.integral && v.lower != v.upper) throw FreeIntegerPresent(v.id);
  const auto start = Clock::now();
  SimplexEngine engine(model, feasibility_tol);
  const LpSolution lp = engine.solve();
  MilpResult out;
  out.node_count = 1;
  out.pivots = lp.pivots;
  switch (lp.status) {
    case LpStatus::Optimal:
      out.status = SolveStatus::Optimal;
      out.objective = lp.objective;
      out.point = lp.x;
      out.dual_bound = lp.dual_bound;
      out.incumbent_source = IncumbentSource::BranchAndBound;
      break;
    case LpStatus::Infeasible: out.status = SolveStatus::Infeasible; break;
    case LpStatus::Unbounded:
      out.status = SolveStatus::Unbounded;
      out.objective = -kInf;
      break;
  }
  out.wall_time = seconds_since(start);
  return out;
}

MilpResult solve_milp(const ParametricMilp& model, const SolveParams& params,
                      const std::optional<std::vector<double>>& incumbent_hint) {
  model.check_invariants();
  const auto start = Clock::now();
  MilpResult out;

  double incumbent = kInf;
  std::vector<double> best;
  if (incumbent_hint) {
    if (incumbent_hint->size() != model.num_variables())
      throw MilpError("incumbent hint must assign every variable");
    const ValidationReport report =
        validate_solution(model, *incumbent_hint, params.feasibility_tol);
    if (report.feasible()) {
      best = *incumbent_hint;
      incumbent = model.evaluate_objective(best);
      out.hint = HintStatus::Accepted;
      out.incumbent_source = IncumbentSource::WarmStartAccepted;
    } else {
      out.hint = HintStatus::Rejected;
      log::warning("warm-start hint is infeasible (worst violation " +
                   std::to_string(report.worst_violation) + "); discarded");
    }
  }

  std::vector<int> integral;
  for (std::size_t j = 0; j < model.num_variables(); ++j)
    if (model.variable(static_cast<int>(j)).integral) integral.push_back(static_cast<int>(j));

  SimplexEngine engine(model, params.feasibility_tol);
  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  std::uint64_t seq = 0;
  open.push(Node{-kInf, seq++, {}});
  bool unbounded = false;

  while (!open.empty()) {
    if (seconds_since(start) > params.time_limit_s) {
      out.hit_time_limit = true;
      break;
    }
    Node node = open.top();
    open.pop();
    if (std::isfinite(incumbent) && node.bound >= incumbent - allowed_gap(params, incumbent))
      continue;

    engine.restore_all_bounds();
    for (const auto& [var, value] : node.fixes) engine.set_bounds(var, value, value);
    const LpSolution lp = engine.solve();
    ++out.node_count;
    out.pivots += lp.pivots;

    if (lp.status == LpStatus::Infeasible) continue;
    if (lp.status == LpStatus::Unbounded) {
      unbounded = true;
      break;
    }
    if (std::isfinite(incumbent) && lp.objective >= incumbent - allowed_gap(params, incumbent))
      continue;

    int branch_var = -1;
    double most = params.feasibility_tol;
    for (int j : integral) {
      const double v = lp.x[j];
      const double frac = std::abs(v - std::round(v));
      if (frac > most) {
        most = frac;
        branch_var = j;
      }
    }
    if (branch_var < 0) {
      incumbent = lp.objective;
      best = lp.x;
      for (int j : integral) best[j] = std::round(best[j]);
      out.incumbent_source = IncumbentSource::BranchAndBound;
      continue;
    }
    Node down{lp.objective, seq++, node.fixes};
    down.fixes.emplace_back(branch_var, 0.0);
    Node up{lp.objective, seq++, std::move(node.fixes)};
    up.fixes.emplace_back(branch_var, 1.0);
    open.push(std::move(down));
    open.push(std::move(up));
  }

  out.wall_time = seconds_since(start);
  if (unbounded) {
    out.status = SolveStatus::Unbounded;
    out.objective = -kInf;
    return out;
  }
  if (best.empty()) {
    out.status = SolveStatus::Infeasible;
    return out;
  }
  out.point = std::move(best);
  out.objective = model.evaluate_objective(out.point);
  out.status = out.hit_time_limit ? SolveStatus::Feasible : SolveStatus::Optimal;
  return out;
}

}  // namespace gaswarm::milp

#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace gaswarm::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Variable partition of a parametric MILP.
///   Continuous -> x1, Slack -> x2, Decision -> z1, Auxiliary -> z2.
enum class Block : std::uint8_t { Continuous, Slack, Decision, Auxiliary };

enum class Sense : std::uint8_t { LessEqual, Equal, GreaterEqual };

struct VariableDef {
  std::string id;
  double lower = 0.0;
  double upper = kInf;
  bool integral = false;
};

struct Term {
  int var;
  double coef;
};

struct Row {
  std::string name;
  std::vector<Term> terms;
  Sense sense = Sense::Equal;
  double rhs = 0.0;
};

class MilpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownVariable : public MilpError {
 public:
  explicit UnknownVariable(const std::string& id) : MilpError("unknown variable: " + id) {}
};

class PartialAssignment : public MilpError {
 public:
  explicit PartialAssignment(const std::string& id)
      : MilpError("assignment misses decision variable: " + id) {}
};

class FreeIntegerPresent : public MilpError {
 public:
  explicit FreeIntegerPresent(const std::string& id)
      : MilpError("integral variable is not fixed: " + id) {}
};

class InvalidModel : public MilpError {
 public:
  using MilpError::MilpError;
};

/// A MILP whose rows, right-hand side and objective depend on an instance
/// parameter. Variables are partitioned into the four blocks of Block; the
/// Decision block is the one learned by the generator.
class ParametricMilp {
 public:
  int add_variable(std::string id, double lower, double upper, Block block);
  int add_row(std::string name, std::vector<Term> terms, Sense sense, double rhs);

  void set_objective(int var, double coef);
  void add_objective(int var, double coef);
  void set_bounds(int var, double lower, double upper);

  [[nodiscard]] std::size_t num_variables() const { return variables_.size(); }
  [[nodiscard]] std::size_t num_rows() const { return rows_.size(); }
  [[nodiscard]] const std::vector<VariableDef>& variables() const { return variables_; }
  [[nodiscard]] const VariableDef& variable(int var) const { return variables_.at(var); }
  [[nodiscard]] const std::vector<Row>& rows() const { return rows_; }
  [[nodiscard]] const Row& row(int r) const { return rows_.at(r); }
  [[nodiscard]] const std::vector<double>& objective() const { return objective_; }
  [[nodiscard]] Block block(int var) const { return blocks_.at(var); }
  [[nodiscard]] std::vector<int> block_members(Block b) const;

  [[nodiscard]] std::optional<int> find(const std::string& id) const;
  /// Throws UnknownVariable.
  [[nodiscard]] int index(const std::string& id) const;

  [[nodiscard]] bool decisions_fixed() const { return decisions_fixed_; }
  void mark_decisions_fixed() { decisions_fixed_ = true; }

  /// Objective value c^T x.
  [[nodiscard]] double evaluate_objective(const std::vector<double>& point) const;
  /// Activity a_r^T x of one row.
  [[nodiscard]] double row_activity(int r, const std::vector<double>& point) const;

  /// Throws InvalidModel when a structural invariant is broken.
  void check_invariants() const;

 private:
  std::vector<VariableDef> variables_;
  std::vector<Block> blocks_;
  std::vector<double> objective_;
  std::vector<Row> rows_;
  std::unordered_map<std::string, int> ids_;
  bool decisions_fixed_ = false;
};

struct SolveParams {
  double time_limit_s = 3600.0;
  double feasibility_tol = 1e-6;
  double mip_gap_rel = 1e-4;
  double mip_gap_abs = 1e-2;
};

enum class SolveStatus : std::uint8_t { Optimal, Feasible, Infeasible, Unbounded };
enum class IncumbentSource : std::uint8_t { None, BranchAndBound, WarmStartAccepted };
enum class HintStatus : std::uint8_t { NotGiven, Accepted, Rejected };

[[nodiscard]] const char* to_string(SolveStatus s);

struct MilpResult {
  SolveStatus status = SolveStatus::Infeasible;
  double objective = kInf;
  std::vector<double> point;
  std::int64_t node_count = 0;
  double wall_time = 0.0;
  IncumbentSource incumbent_source = IncumbentSource::None;
  HintStatus hint = HintStatus::NotGiven;
  /// Set when the search stopped at the time limit; combined with
  /// status Infeasible it means "no solution found so far".
  bool hit_time_limit = false;
  /// Total simplex pivots, a deterministic work measure.
  std::int64_t pivots = 0;
  /// LP only: objective of the dual solution read off the final basis.
  std::optional<double> dual_bound;

  [[nodiscard]] bool has_solution() const {
    return status == SolveStatus::Optimal || status == SolveStatus::Feasible;
  }
  [[nodiscard]] double value(const ParametricMilp& model, const std::string& id) const {
    return point.at(model.index(id));
  }
};

struct RowViolation {
  int row;
  double activity;
  double violation;
};

struct BoundViolation {
  int var;
  double value;
  double violation;
};

struct ValidationReport {
  std::vector<RowViolation> rows;
  std::vector<BoundViolation> bounds;
  std::vector<int> integrality;
  double worst_violation = 0.0;

  [[nodiscard]] bool feasible() const {
    return rows.empty() && bounds.empty() && integrality.empty();
  }
};

/// Fixes every Decision variable to the given 0/1 value.
/// Throws UnknownVariable for ids outside the Decision block and
/// PartialAssignment when a Decision variable is missing.
[[nodiscard]] ParametricMilp fix_binaries(const ParametricMilp& model,
                                          const std::map<std::string, int>& assignment);

/// Solves a model whose integral variables are all fixed. Throws FreeIntegerPresent.
[[nodiscard]] MilpResult solve_lp(const ParametricMilp& model, double feasibility_tol = 1e-6);

/// Best-first branch and bound. The hint, when given, must assign every variable;
/// an infeasible hint is discarded with a warning.
[[nodiscard]] MilpResult solve_milp(const ParametricMilp& model, const SolveParams& params,
                                    const std::optional<std::vector<double>>& incumbent_hint = {});

[[nodiscard]] ValidationReport validate_solution(const ParametricMilp& model,
                                                 const std::vector<double>& point, double tol);

/// LP-style text listing for inspection.
[[nodiscard]] std::string to_lp_string(const ParametricMilp& model);

}  // namespace gaswarm::milp

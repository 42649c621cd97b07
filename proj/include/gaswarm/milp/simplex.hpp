#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "gaswarm/milp/model.hpp"

namespace gaswarm::milp {

enum class LpStatus : std::uint8_t { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double objective = kInf;
  double dual_bound = -kInf;
  std::vector<double> x;
  std::int64_t pivots = 0;
};

/// Bounded-variable simplex over the LP relaxation of a ParametricMilp.
///
/// Rows are scaled by their largest absolute coefficient and written as
/// A x - r = 0 with one bounded logical r per row, so the all-logical basis
/// is always available. The basis is held as a sparse LU factorization plus
/// a file of eta updates, refactorized periodically.
///
/// The engine keeps its basis between solve() calls. After bound changes
/// the old basis stays dual feasible for boxed variables, and the dual
/// simplex restores primal feasibility; this is how branch-and-bound nodes
/// and enumeration loops re-solve cheaply.
class SimplexEngine {
 public:
  explicit SimplexEngine(const ParametricMilp& model, double feasibility_tol = 1e-6);
  ~SimplexEngine();
  SimplexEngine(const SimplexEngine&) = delete;
  SimplexEngine& operator=(const SimplexEngine&) = delete;

  void set_bounds(int var, double lower, double upper);
  void restore_bounds(int var);
  void restore_all_bounds();
  [[nodiscard]] double lower(int var) const { return lo_[var]; }
  [[nodiscard]] double upper(int var) const { return up_[var]; }

  LpSolution solve();

  /// Drops the stored basis; the next solve starts from the logical basis.
  void reset_basis();

  [[nodiscard]] int num_structural() const { return n_; }
  [[nodiscard]] int num_rows() const { return m_; }

 private:
  enum class VarStatus : std::uint8_t { Basic, AtLower, AtUpper, FreeZero };
  enum class Outcome : std::uint8_t { Done, Infeasible, Unbounded, Stalled };

  [[nodiscard]] double column_dot(int j, const std::vector<double>& y) const;
  void column_into(int j, std::vector<double>& out) const;  // out = B^-1 a_j
  void ftran(std::vector<double>& v) const;                // v <- B^-1 v
  void btran(std::vector<double>& v) const;                // v <- B^-T v
  void compute_duals(const std::vector<double>& costs, std::vector<double>& y) const;
  [[nodiscard]] double reduced_cost(int j, const std::vector<double>& costs,
                                    const std::vector<double>& y) const;

  LpSolution run();
  void install_logical_basis();
  bool refactor();
  void place_nonbasic(int j);
  void recompute_basics();
  [[nodiscard]] double max_primal_infeasibility() const;
  bool make_dual_feasible(const std::vector<double>& y);
  void pivot(int row, int entering, const std::vector<double>& alpha);

  Outcome primal(bool phase_one);
  Outcome dual();
  void note_pivot(double step);

  int n_ = 0;  // structural columns
  int m_ = 0;  // rows == logical columns
  double feas_tol_;
  double dual_tol_ = 1e-9;
  double pivot_tol_ = 1e-7;

  // Scaled column-major structural matrix.
  std::vector<int> col_start_;
  std::vector<int> col_row_;
  std::vector<double> col_val_;

  std::vector<double> cost_;
  std::vector<double> lo_, up_;
  std::vector<double> base_lo_, base_up_;

  std::vector<int> head_;  // basic variable of each row position
  std::vector<VarStatus> status_;
  std::vector<double> x_;
  struct Factor;
  std::unique_ptr<Factor> factor_;
  bool have_basis_ = false;
  int since_refactor_ = 0;

  std::int64_t pivots_ = 0;
  std::int64_t degenerate_run_ = 0;
  bool bland_ = false;
};

}  // namespace gaswarm::milp

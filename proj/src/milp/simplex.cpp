#include "gaswarm/milp/simplex.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace gaswarm::milp {

namespace {

constexpr int kRefactorInterval = 100;
constexpr std::int64_t kDegenerateBeforeBland = 5000;

bool finite(double v) { return std::isfinite(v); }

}  // namespace

// B = B0 * E_1^-1 * ... * E_k^-1, where B0 is factorized and each eta E_i
// replaces basis position `row` by a column whose B^-1 image is alpha.
struct SimplexEngine::Factor {
  struct Eta {
    int row;
    double pivot;
    std::vector<int> idx;
    std::vector<double> val;
  };
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  std::vector<Eta> etas;
};

SimplexEngine::~SimplexEngine() = default;

SimplexEngine::SimplexEngine(const ParametricMilp& model, double feasibility_tol)
    : n_(static_cast<int>(model.num_variables())),
      m_(static_cast<int>(model.num_rows())),
      feas_tol_(feasibility_tol) {
  const int total = n_ + m_;
  std::vector<double> row_scale(m_, 1.0);
  for (int r = 0; r < m_; ++r) {
    double biggest = 0.0;
    for (const Term& t : model.row(r).terms) biggest = std::max(biggest, std::abs(t.coef));
    if (biggest > 0.0) row_scale[r] = biggest;
  }

  std::vector<int> counts(n_, 0);
  for (int r = 0; r < m_; ++r)
    for (const Term& t : model.row(r).terms)
      if (t.coef != 0.0) ++counts[t.var];
  col_start_.assign(n_ + 1, 0);
  for (int j = 0; j < n_; ++j) col_start_[j + 1] = col_start_[j] + counts[j];
  col_row_.resize(col_start_[n_]);
  col_val_.resize(col_start_[n_]);
  std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
  for (int r = 0; r < m_; ++r) {
    for (const Term& t : model.row(r).terms) {
      if (t.coef == 0.0) continue;
      const int at = fill[t.var]++;
      col_row_[at] = r;
      col_val_[at] = t.coef / row_scale[r];
    }
  }

  cost_.assign(total, 0.0);
  for (int j = 0; j < n_; ++j) cost_[j] = model.objective()[j];

  base_lo_.resize(total);
  base_up_.resize(total);
  for (int j = 0; j < n_; ++j) {
    base_lo_[j] = model.variable(j).lower;
    base_up_[j] = model.variable(j).upper;
  }
  for (int r = 0; r < m_; ++r) {
    const Row& row = model.row(r);
    const double b = row.rhs / row_scale[r];
    switch (row.sense) {
      case Sense::LessEqual: base_lo_[n_ + r] = -kInf; base_up_[n_ + r] = b; break;
      case Sense::GreaterEqual: base_lo_[n_ + r] = b; base_up_[n_ + r] = kInf; break;
      case Sense::Equal: base_lo_[n_ + r] = b; base_up_[n_ + r] = b; break;
    }
  }
  lo_ = base_lo_;
  up_ = base_up_;
  status_.assign(total, VarStatus::AtLower);
  x_.assign(total, 0.0);
  factor_ = std::make_unique<Factor>();
}

void SimplexEngine::set_bounds(int var, double lower, double upper) {
  lo_[var] = lower;
  up_[var] = upper;
}

void SimplexEngine::restore_bounds(int var) {
  lo_[var] = base_lo_[var];
  up_[var] = base_up_[var];
}

void SimplexEngine::restore_all_bounds() {
  std::copy(base_lo_.begin(), base_lo_.begin() + n_, lo_.begin());
  std::copy(base_up_.begin(), base_up_.begin() + n_, up_.begin());
}

void SimplexEngine::reset_basis() { have_basis_ = false; }

double SimplexEngine::column_dot(int j, const std::vector<double>& y) const {
  if (j >= n_) return -y[j - n_];
  double s = 0.0;
  for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) s += col_val_[k] * y[col_row_[k]];
  return s;
}

void SimplexEngine::ftran(std::vector<double>& v) const {
  Eigen::Map<Eigen::VectorXd> vec(v.data(), m_);
  Eigen::VectorXd x = factor_->lu.solve(vec);
  for (const Factor::Eta& e : factor_->etas) {
    const double xr = x[e.row] / e.pivot;
    if (xr != 0.0)
      for (std::size_t k = 0; k < e.idx.size(); ++k) x[e.idx[k]] -= e.val[k] * xr;
    x[e.row] = xr;
  }
  vec = x;
}

void SimplexEngine::btran(std::vector<double>& v) const {
  for (auto it = factor_->etas.rbegin(); it != factor_->etas.rend(); ++it) {
    double s = v[it->row];
    for (std::size_t k = 0; k < it->idx.size(); ++k) s -= it->val[k] * v[it->idx[k]];
    v[it->row] = s / it->pivot;
  }
  Eigen::Map<Eigen::VectorXd> vec(v.data(), m_);
  Eigen::VectorXd y = factor_->lu.transpose().solve(vec);
  vec = y;
}

void SimplexEngine::column_into(int j, std::vector<double>& out) const {
  out.assign(m_, 0.0);
  if (j >= n_) {
    out[j - n_] = -1.0;
  } else {
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) out[col_row_[k]] = col_val_[k];
  }
  ftran(out);
}

void SimplexEngine::compute_duals(const std::vector<double>& costs, std::vector<double>& y) const {
  std::vector<double> cb(m_);
  bool any = false;
  for (int i = 0; i < m_; ++i) {
    cb[i] = costs[head_[i]];
    any = any || cb[i] != 0.0;
  }
  if (!any) {
    y.assign(m_, 0.0);
    return;
  }
  btran(cb);
  y = std::move(cb);
}

double SimplexEngine::reduced_cost(int j, const std::vector<double>& costs,
                                   const std::vector<double>& y) const {
  return costs[j] - column_dot(j, y);
}

void SimplexEngine::install_logical_basis() {
  head_.resize(m_);
  for (int i = 0; i < m_; ++i) {
    head_[i] = n_ + i;
    status_[n_ + i] = VarStatus::Basic;
  }
  for (int j = 0; j < n_; ++j) {
    if (status_[j] == VarStatus::Basic) status_[j] = VarStatus::AtLower;
    place_nonbasic(j);
  }
  refactor();
  have_basis_ = true;
}

bool SimplexEngine::refactor() {
  std::vector<Eigen::Triplet<double>> entries;
  for (int i = 0; i < m_; ++i) {
    const int j = head_[i];
    if (j >= n_) {
      entries.emplace_back(j - n_, i, -1.0);
    } else {
      for (int k = col_start_[j]; k < col_start_[j + 1]; ++k)
        entries.emplace_back(col_row_[k], i, col_val_[k]);
    }
  }
  Eigen::SparseMatrix<double> basis(m_, m_);
  basis.setFromTriplets(entries.begin(), entries.end());
  basis.makeCompressed();
  // On failure the previous factorization and its etas stay in place.
  auto fresh = std::make_unique<Factor>();
  fresh->lu.compute(basis);
  if (fresh->lu.info() != Eigen::Success) return false;
  // Exact-zero pivots are the only thing the factorization reports; reject
  // numerically singular bases by checking a solve against B.
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(m_);
  Eigen::VectorXd check = fresh->lu.solve(ones);
  if (!check.allFinite() || (basis * check - ones).lpNorm<Eigen::Infinity>() > 1e-7) return false;
  factor_ = std::move(fresh);
  since_refactor_ = 0;
  return true;
}

void SimplexEngine::place_nonbasic(int j) {
  const double lo = lo_[j];
  const double up = up_[j];
  if (lo == up) {
    status_[j] = VarStatus::AtLower;
    x_[j] = lo;
    return;
  }
  if (status_[j] == VarStatus::AtLower && finite(lo)) {
    x_[j] = lo;
  } else if (status_[j] == VarStatus::AtUpper && finite(up)) {
    x_[j] = up;
  } else if (finite(lo)) {
    status_[j] = VarStatus::AtLower;
    x_[j] = lo;
  } else if (finite(up)) {
    status_[j] = VarStatus::AtUpper;
    x_[j] = up;
  } else {
    status_[j] = VarStatus::FreeZero;
    x_[j] = 0.0;
  }
}

void SimplexEngine::recompute_basics() {
  std::vector<double> v(m_, 0.0);
  for (int j = 0; j < n_; ++j) {
    if (status_[j] == VarStatus::Basic || x_[j] == 0.0) continue;
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) v[col_row_[k]] -= col_val_[k] * x_[j];
  }
  for (int i = 0; i < m_; ++i) {
    const int j = n_ + i;
    if (status_[j] != VarStatus::Basic) v[i] += x_[j];
  }
  ftran(v);
  for (int i = 0; i < m_; ++i) x_[head_[i]] = v[i];
}

double SimplexEngine::max_primal_infeasibility() const {
  double worst = 0.0;
  for (int i = 0; i < m_; ++i) {
    const int j = head_[i];
    worst = std::max({worst, lo_[j] - x_[j], x_[j] - up_[j]});
  }
  return worst;
}

bool SimplexEngine::make_dual_feasible(const std::vector<double>& y) {
  bool ok = true;
  for (int j = 0; j < n_ + m_; ++j) {
    if (status_[j] == VarStatus::Basic || lo_[j] == up_[j]) continue;
    const double d = reduced_cost(j, cost_, y);
    if (finite(lo_[j]) && finite(up_[j])) {
      if (d < -dual_tol_) {
        status_[j] = VarStatus::AtUpper;
        x_[j] = up_[j];
      } else if (d > dual_tol_ || status_[j] == VarStatus::FreeZero) {
        status_[j] = VarStatus::AtLower;
        x_[j] = lo_[j];
      }
      continue;
    }
    switch (status_[j]) {
      case VarStatus::AtLower: ok = ok && d >= -dual_tol_; break;
      case VarStatus::AtUpper: ok = ok && d <= dual_tol_; break;
      case VarStatus::FreeZero: ok = ok && std::abs(d) <= dual_tol_; break;
      case VarStatus::Basic: break;
    }
  }
  return ok;
}

void SimplexEngine::pivot(int row, int entering, const std::vector<double>& alpha) {
  Factor::Eta eta{row, alpha[row], {}, {}};
  for (int i = 0; i < m_; ++i) {
    if (i == row || alpha[i] == 0.0) continue;
    eta.idx.push_back(i);
    eta.val.push_back(alpha[i]);
  }
  factor_->etas.push_back(std::move(eta));
  head_[row] = entering;
  status_[entering] = VarStatus::Basic;
  ++pivots_;
  if (++since_refactor_ >= kRefactorInterval) {
    if (refactor()) recompute_basics();
  }
}

void SimplexEngine::note_pivot(double step) {
  if (std::abs(step) <= 1e-12) {
    if (++degenerate_run_ >= kDegenerateBeforeBland) bland_ = true;
  } else {
    degenerate_run_ = 0;
  }
}

SimplexEngine::Outcome SimplexEngine::primal(bool phase_one) {
  const int total = n_ + m_;
  const std::int64_t limit = 50LL * total + 20000;
  std::vector<double> costs = phase_one ? std::vector<double>(total, 0.0) : cost_;
  std::vector<double> y;
  std::vector<double> alpha;
  for (std::int64_t iter = 0;; ++iter) {
    if (iter > limit) throw MilpError("simplex iteration limit reached");
    if (phase_one) {
      std::fill(costs.begin(), costs.end(), 0.0);
      bool infeasible = false;
      for (int i = 0; i < m_; ++i) {
        const int j = head_[i];
        if (x_[j] < lo_[j] - feas_tol_) {
          costs[j] = -1.0;
          infeasible = true;
        } else if (x_[j] > up_[j] + feas_tol_) {
          costs[j] = 1.0;
          infeasible = true;
        }
      }
      if (!infeasible) return Outcome::Done;
    }
    compute_duals(costs, y);

    int entering = -1;
    double best = 0.0;
    double entering_d = 0.0;
    for (int j = 0; j < total; ++j) {
      const VarStatus s = status_[j];
      if (s == VarStatus::Basic || lo_[j] == up_[j]) continue;
      const double d = reduced_cost(j, costs, y);
      double score = 0.0;
      if (s == VarStatus::AtLower && d < -dual_tol_) score = -d;
      else if (s == VarStatus::AtUpper && d > dual_tol_) score = d;
      else if (s == VarStatus::FreeZero && std::abs(d) > dual_tol_) score = std::abs(d);
      if (score == 0.0) continue;
      if (bland_) {
        entering = j;
        entering_d = d;
        break;
      }
      if (score > best) {
        best = score;
        entering = j;
        entering_d = d;
      }
    }
    if (entering < 0) {
      // Only trust an infeasibility verdict computed from a fresh factorization.
      if (phase_one && since_refactor_ > 0 && refactor()) {
        recompute_basics();
        continue;
      }
      return phase_one ? Outcome::Infeasible : Outcome::Done;
    }

    const double dir = (status_[entering] == VarStatus::AtLower ||
                        (status_[entering] == VarStatus::FreeZero && entering_d < 0.0))
                           ? 1.0
                           : -1.0;
    column_into(entering, alpha);

    // Harris two-pass ratio test.
    double t_max = kInf;
    for (int i = 0; i < m_; ++i) {
      const double a = alpha[i];
      if (std::abs(a) <= pivot_tol_) continue;
      const double rate = -dir * a;
      const int b = head_[i];
      double dist;
      if (rate < 0.0) {
        if (phase_one && x_[b] > up_[b] + feas_tol_) dist = x_[b] - up_[b];
        else if (phase_one && x_[b] < lo_[b] - feas_tol_) continue;
        else if (finite(lo_[b])) dist = x_[b] - lo_[b];
        else continue;
      } else {
        if (phase_one && x_[b] < lo_[b] - feas_tol_) dist = lo_[b] - x_[b];
        else if (phase_one && x_[b] > up_[b] + feas_tol_) continue;
        else if (finite(up_[b])) dist = up_[b] - x_[b];
        else continue;
      }
      t_max = std::min(t_max, (std::max(dist, 0.0) + feas_tol_) / std::abs(rate));
    }
    int leave_row = -1;
    double leave_t = kInf;
    bool leave_to_upper = false;
    double leave_alpha = 0.0;
    if (finite(t_max)) {
      for (int i = 0; i < m_; ++i) {
        const double a = alpha[i];
        if (std::abs(a) <= pivot_tol_) continue;
        const double rate = -dir * a;
        const int b = head_[i];
        double dist;
        bool to_upper;
        if (rate < 0.0) {
          if (phase_one && x_[b] > up_[b] + feas_tol_) { dist = x_[b] - up_[b]; to_upper = true; }
          else if (phase_one && x_[b] < lo_[b] - feas_tol_) continue;
          else if (finite(lo_[b])) { dist = x_[b] - lo_[b]; to_upper = false; }
          else continue;
        } else {
          if (phase_one && x_[b] < lo_[b] - feas_tol_) { dist = lo_[b] - x_[b]; to_upper = false; }
          else if (phase_one && x_[b] > up_[b] + feas_tol_) continue;
          else if (finite(up_[b])) { dist = up_[b] - x_[b]; to_upper = true; }
          else continue;
        }
        const double t = std::max(dist, 0.0) / std::abs(rate);
        if (t > t_max) continue;
        bool take;
        if (leave_row < 0) take = true;
        else if (bland_) take = t < leave_t - 1e-15 || (t <= leave_t + 1e-15 && b < head_[leave_row]);
        else take = std::abs(a) > std::abs(leave_alpha);
        if (take) {
          leave_row = i;
          leave_t = t;
          leave_to_upper = to_upper;
          leave_alpha = a;
        }
      }
    }

    const double flip = (finite(lo_[entering]) && finite(up_[entering]))
                            ? up_[entering] - lo_[entering]
                            : kInf;
    if (leave_row < 0 && !finite(flip)) return phase_one ? Outcome::Infeasible : Outcome::Unbounded;

    if (leave_row < 0 || flip <= leave_t) {
      x_[entering] += dir * flip;
      for (int i = 0; i < m_; ++i) x_[head_[i]] -= dir * flip * alpha[i];
      status_[entering] = dir > 0 ? VarStatus::AtUpper : VarStatus::AtLower;
      x_[entering] = dir > 0 ? up_[entering] : lo_[entering];
      ++pivots_;
      note_pivot(flip);
      continue;
    }

    const double t = leave_t;
    x_[entering] += dir * t;
    for (int i = 0; i < m_; ++i) x_[head_[i]] -= dir * t * alpha[i];
    const int leaving = head_[leave_row];
    status_[leaving] = leave_to_upper ? VarStatus::AtUpper : VarStatus::AtLower;
    x_[leaving] = leave_to_upper ? up_[leaving] : lo_[leaving];
    if (lo_[leaving] == up_[leaving]) status_[leaving] = VarStatus::AtLower;
    pivot(leave_row, entering, alpha);
    note_pivot(t);
  }
}

SimplexEngine::Outcome SimplexEngine::dual() {
  const int total = n_ + m_;
  // Most costs are zero, so the dual is highly degenerate. Shifting each
  // nonbasic cost a little further into its feasible side breaks the ties;
  // the caller finishes with a primal pass on the true costs.
  std::vector<double> costs = cost_;
  auto margin = [&](int j) {
    const double frac = std::fmod(0.6180339887 * (j + 1), 1.0);
    return 1e-7 * (1.0 + std::abs(cost_[j])) * (1.0 + frac);
  };
  for (int j = 0; j < n_; ++j) {
    if (status_[j] == VarStatus::Basic || lo_[j] == up_[j]) continue;
    if (status_[j] == VarStatus::AtLower) costs[j] += margin(j);
    else if (status_[j] == VarStatus::AtUpper) costs[j] -= margin(j);
  }
  const std::int64_t limit = 50LL * total + 20000;
  std::vector<double> y;
  std::vector<double> rho(m_);
  std::vector<double> alpha;
  std::vector<double> d(total, 0.0);
  std::vector<double> arow(total, 0.0);
  for (std::int64_t iter = 0;; ++iter) {
    if (iter > limit) throw MilpError("dual simplex iteration limit reached");
    // Harris steps let reduced costs drift past zero. Small drift is
    // absorbed by shifting the working cost; boxed variables that are
    // clearly on the wrong side move to their other bound.
    compute_duals(costs, y);
    bool flipped = false;
    for (int j = 0; j < total; ++j) {
      const VarStatus s = status_[j];
      if (s == VarStatus::Basic || lo_[j] == up_[j]) continue;
      const double dj = reduced_cost(j, costs, y);
      double wrong = 0.0;  // signed amount past zero
      if (s == VarStatus::AtLower && dj < -dual_tol_) wrong = dj;
      else if (s == VarStatus::AtUpper && dj > dual_tol_) wrong = dj;
      else if (s == VarStatus::FreeZero && std::abs(dj) > dual_tol_) wrong = dj;
      if (wrong == 0.0) continue;
      const bool boxed = finite(lo_[j]) && finite(up_[j]);
      if (boxed && std::abs(wrong) > 1e-6 * (1.0 + std::abs(cost_[j]))) {
        status_[j] = s == VarStatus::AtLower ? VarStatus::AtUpper : VarStatus::AtLower;
        x_[j] = s == VarStatus::AtLower ? up_[j] : lo_[j];
        flipped = true;
      } else if (s == VarStatus::FreeZero) {
        costs[j] -= wrong;
      } else {
        costs[j] -= wrong + (s == VarStatus::AtLower ? -margin(j) : margin(j));
      }
    }
    if (flipped) recompute_basics();

    int r = -1;
    double worst = 0.0;
    for (int i = 0; i < m_; ++i) {
      const int j = head_[i];
      const double infeas = std::max(lo_[j] - x_[j], x_[j] - up_[j]);
      if (infeas <= feas_tol_) continue;
      if (bland_) {
        if (r < 0 || j < head_[r]) r = i;
      } else if (infeas > worst) {
        worst = infeas;
        r = i;
      }
    }
    if (r < 0) return Outcome::Done;
    const int leaving = head_[r];
    const bool below = x_[leaving] < lo_[leaving];

    std::fill(rho.begin(), rho.end(), 0.0);
    rho[r] = 1.0;
    btran(rho);

    double t_max = kInf;
    for (int j = 0; j < total; ++j) {
      const VarStatus s = status_[j];
      arow[j] = 0.0;
      if (s == VarStatus::Basic || lo_[j] == up_[j]) continue;
      const double a = column_dot(j, rho);
      if (std::abs(a) <= pivot_tol_) continue;
      const double dj = reduced_cost(j, costs, y);
      double slack;
      if (s == VarStatus::AtLower) {
        if (below ? a >= 0.0 : a <= 0.0) continue;
        slack = std::max(dj, 0.0);
      } else if (s == VarStatus::AtUpper) {
        if (below ? a <= 0.0 : a >= 0.0) continue;
        slack = std::max(-dj, 0.0);
      } else {
        slack = std::abs(dj);
      }
      arow[j] = a;
      d[j] = slack;
      t_max = std::min(t_max, (slack + dual_tol_) / std::abs(a));
    }
    if (!finite(t_max)) return Outcome::Infeasible;

    int entering = -1;
    double best_ratio = kInf;
    for (int j = 0; j < total; ++j) {
      const double a = arow[j];
      if (a == 0.0) continue;
      const double ratio = d[j] / std::abs(a);
      if (ratio > t_max) continue;
      bool take;
      if (entering < 0) take = true;
      else if (bland_) take = ratio < best_ratio - 1e-15;
      else take = std::abs(a) > std::abs(arow[entering]);
      if (take) {
        entering = j;
        best_ratio = ratio;
      }
    }

    column_into(entering, alpha);
    // The pivot computed from the row (BTRAN) and from the column (FTRAN)
    // must agree; if not, the factorization has drifted.
    if (std::abs(alpha[r] - arow[entering]) > 1e-6 * (1.0 + std::abs(alpha[r])) ||
        std::abs(alpha[r]) <= pivot_tol_) {
      if (since_refactor_ == 0 || !refactor()) return Outcome::Stalled;
      recompute_basics();
      continue;
    }
    const double target = below ? lo_[leaving] : up_[leaving];
    const double delta = (x_[leaving] - target) / alpha[r];
    x_[entering] += delta;
    for (int i = 0; i < m_; ++i) x_[head_[i]] -= delta * alpha[i];
    status_[leaving] = below ? VarStatus::AtLower : VarStatus::AtUpper;
    x_[leaving] = target;
    pivot(r, entering, alpha);
    note_pivot(best_ratio);
  }
}

LpSolution SimplexEngine::solve() {
  pivots_ = 0;
  if (!have_basis_) return run();
  try {
    return run();
  } catch (const MilpError&) {
    // A warm basis can be numerically poor; retry once from scratch.
    const std::int64_t spent = pivots_;
    have_basis_ = false;
    LpSolution out = run();
    out.pivots += spent;
    return out;
  }
}

LpSolution SimplexEngine::run() {
  degenerate_run_ = 0;
  bland_ = false;
  const std::int64_t start_pivots = pivots_;
  if (!have_basis_) {
    install_logical_basis();
  } else {
    for (int j = 0; j < n_ + m_; ++j)
      if (status_[j] != VarStatus::Basic) place_nonbasic(j);
  }
  recompute_basics();

  LpSolution out;
  Outcome outcome = Outcome::Done;
  for (int round = 0; round < 3; ++round) {
    if (max_primal_infeasibility() > feas_tol_) {
      std::vector<double> y;
      compute_duals(cost_, y);
      if (make_dual_feasible(y)) {
        recompute_basics();
        outcome = dual();
        if (outcome != Outcome::Done) {
          // Confirm with the primal phase one; the dual ratio test can stall
          // on tiny pivots that the primal route handles.
          outcome = primal(true);
        }
      } else {
        outcome = primal(true);
      }
      if (outcome == Outcome::Infeasible) break;
    }
    outcome = primal(false);
    if (outcome != Outcome::Done) break;
    if (!refactor()) {
      install_logical_basis();
      recompute_basics();
      continue;
    }
    recompute_basics();
    if (max_primal_infeasibility() <= feas_tol_) break;
  }

  out.pivots = pivots_ - start_pivots;
  if (outcome == Outcome::Infeasible) {
    out.status = LpStatus::Infeasible;
    return out;
  }
  if (outcome == Outcome::Unbounded) {
    out.status = LpStatus::Unbounded;
    out.objective = -kInf;
    return out;
  }
  out.status = LpStatus::Optimal;
  out.x.assign(x_.begin(), x_.begin() + n_);
  double obj = 0.0;
  for (int j = 0; j < n_; ++j) obj += cost_[j] * x_[j];
  out.objective = obj;
  std::vector<double> y;
  compute_duals(cost_, y);
  double dual_obj = 0.0;
  for (int j = 0; j < n_ + m_; ++j) {
    if (status_[j] == VarStatus::Basic) continue;
    dual_obj += reduced_cost(j, cost_, y) * x_[j];
  }
  out.dual_bound = dual_obj;
  return out;
}

}  // namespace gaswarm::milp

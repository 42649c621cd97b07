#include "gaswarm/milp/model.hpp"

#include <cmath>
#include <sstream>

namespace gaswarm::milp {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
  }
  return "?";
}

int ParametricMilp::add_variable(std::string id, double lower, double upper, Block block) {
  if (ids_.count(id) != 0) throw InvalidModel("duplicate variable id: " + id);
  const bool integral = block == Block::Decision || block == Block::Auxiliary;
  if (integral) {
    lower = std::max(lower, 0.0);
    upper = std::min(upper, 1.0);
  }
  if (lower > upper) throw InvalidModel("empty domain for variable " + id);
  const int index = static_cast<int>(variables_.size());
  ids_.emplace(id, index);
  variables_.push_back(VariableDef{std::move(id), lower, upper, integral});
  blocks_.push_back(block);
  objective_.push_back(0.0);
  return index;
}

int ParametricMilp::add_row(std::string name, std::vector<Term> terms, Sense sense, double rhs) {
  if (!std::isfinite(rhs)) throw InvalidModel("non-finite rhs in row " + name);
  for (const Term& t : terms)
    if (t.var < 0 || t.var >= static_cast<int>(variables_.size()))
      throw InvalidModel("row " + name + " references an undeclared variable");
  rows_.push_back(Row{std::move(name), std::move(terms), sense, rhs});
  return static_cast<int>(rows_.size()) - 1;
}

void ParametricMilp::set_objective(int var, double coef) { objective_.at(var) = coef; }
void ParametricMilp::add_objective(int var, double coef) { objective_.at(var) += coef; }

void ParametricMilp::set_bounds(int var, double lower, double upper) {
  if (lower > upper) throw InvalidModel("empty domain for variable " + variables_.at(var).id);
  variables_.at(var).lower = lower;
  variables_.at(var).upper = upper;
}

std::vector<int> ParametricMilp::block_members(Block b) const {
  std::vector<int> out;
  for (std::size_t j = 0; j < blocks_.size(); ++j)
    if (blocks_[j] == b) out.push_back(static_cast<int>(j));
  return out;
}

std::optional<int> ParametricMilp::find(const std::string& id) const {
  const auto it = ids_.find(id);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

int ParametricMilp::index(const std::string& id) const {
  const auto it = ids_.find(id);
  if (it == ids_.end()) throw UnknownVariable(id);
  return it->second;
}

double ParametricMilp::evaluate_objective(const std::vector<double>& point) const {
  double s = 0.0;
  for (std::size_t j = 0; j < objective_.size(); ++j) s += objective_[j] * point.at(j);
  return s;
}

double ParametricMilp::row_activity(int r, const std::vector<double>& point) const {
  double s = 0.0;
  for (const Term& t : rows_.at(r).terms) s += t.coef * point.at(t.var);
  return s;
}

void ParametricMilp::check_invariants() const {
  for (std::size_t j = 0; j < variables_.size(); ++j) {
    const VariableDef& v = variables_[j];
    if (v.lower > v.upper) throw InvalidModel("lower > upper for " + v.id);
    const bool integral = blocks_[j] == Block::Decision || blocks_[j] == Block::Auxiliary;
    if (integral != v.integral) throw InvalidModel("integrality flag mismatch for " + v.id);
    if (integral && (v.lower < 0.0 || v.upper > 1.0))
      throw InvalidModel("binary variable outside [0,1]: " + v.id);
    if (blocks_[j] == Block::Slack && objective_[j] < 0.0)
      throw InvalidModel("negative objective on slack " + v.id);
  }
  for (const Row& r : rows_) {
    if (!std::isfinite(r.rhs)) throw InvalidModel("non-finite rhs in row " + r.name);
    for (const Term& t : r.terms)
      if (t.var < 0 || t.var >= static_cast<int>(variables_.size()))
        throw InvalidModel("row " + r.name + " references an undeclared variable");
  }
}

ParametricMilp fix_binaries(const ParametricMilp& model,
                            const std::map<std::string, int>& assignment) {
  ParametricMilp out = model;
  for (const auto& [id, value] : assignment) {
    const auto var = model.find(id);
    if (!var || model.block(*var) != Block::Decision) throw UnknownVariable(id);
    if (value != 0 && value != 1) throw MilpError("binary value must be 0 or 1 for " + id);
  }
  for (int j : model.block_members(Block::Decision)) {
    const auto it = assignment.find(model.variable(j).id);
    if (it == assignment.end()) throw PartialAssignment(model.variable(j).id);
    out.set_bounds(j, it->second, it->second);
  }
  out.mark_decisions_fixed();
  return out;
}

ValidationReport validate_solution(const ParametricMilp& model, const std::vector<double>& point,
                                   double tol) {
  ValidationReport report;
  if (point.size() != model.num_variables())
    throw MilpError("point does not assign every variable");
  for (std::size_t r = 0; r < model.num_rows(); ++r) {
    const Row& row = model.row(static_cast<int>(r));
    const double act = model.row_activity(static_cast<int>(r), point);
    double viol = 0.0;
    switch (row.sense) {
      case Sense::LessEqual: viol = act - row.rhs; break;
      case Sense::GreaterEqual: viol = row.rhs - act; break;
      case Sense::Equal: viol = std::abs(act - row.rhs); break;
    }
    if (viol > tol) report.rows.push_back({static_cast<int>(r), act, viol});
    report.worst_violation = std::max(report.worst_violation, viol);
  }
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    const VariableDef& v = model.variable(static_cast<int>(j));
    const double x = point[j];
    const double viol = std::max(v.lower - x, x - v.upper);
    if (viol > tol) report.bounds.push_back({static_cast<int>(j), x, viol});
    report.worst_violation = std::max(report.worst_violation, viol);
    if (v.integral) {
      const double frac = std::abs(x - std::round(x));
      if (frac > tol) report.integrality.push_back(static_cast<int>(j));
      report.worst_violation = std::max(report.worst_violation, frac);
    }
  }
  return report;
}

namespace {

void write_coef(std::ostringstream& os, double c, const std::string& id, bool first) {
  if (c < 0) os << (first ? " -" : " - ");
  else os << (first ? " " : " + ");
  const double a = std::abs(c);
  if (a != 1.0) os << a << ' ';
  os << id;
}

}  // namespace

std::string to_lp_string(const ParametricMilp& model) {
  std::ostringstream os;
  os.precision(12);
  os << "Minimize\n obj:";
  bool first = true;
  for (std::size_t j = 0; j < model.num_variables(); ++j) {
    const double c = model.objective()[j];
    if (c == 0.0) continue;
    write_coef(os, c, model.variable(static_cast<int>(j)).id, first);
    first = false;
  }
  if (first) os << " 0";
  os << "\nSubject To\n";
  for (const Row& r : model.rows()) {
    os << ' ' << r.name << ':';
    bool f = true;
    for (const Term& t : r.terms) {
      write_coef(os, t.coef, model.variable(t.var).id, f);
      f = false;
    }
    if (f) os << " 0";
    os << (r.sense == Sense::LessEqual ? " <= " : r.sense == Sense::Equal ? " = " : " >= ") << r.rhs
       << '\n';
  }
  os << "Bounds\n";
  for (const VariableDef& v : model.variables()) {
    os << ' ';
    if (std::isinf(v.lower)) os << "-inf"; else os << v.lower;
    os << " <= " << v.id << " <= ";
    if (std::isinf(v.upper)) os << "+inf"; else os << v.upper;
    os << '\n';
  }
  os << "Binaries\n";
  for (const VariableDef& v : model.variables())
    if (v.integral) os << ' ' << v.id << '\n';
  os << "End\n";
  return os.str();
}

}  // namespace gaswarm::milp

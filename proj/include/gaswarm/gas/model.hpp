#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gaswarm/gas/instance.hpp"
#include "gaswarm/gas/network.hpp"
#include "gaswarm/milp/model.hpp"

namespace gaswarm::gas {

struct ObjectiveWeights {
  double pressure_slack = 100.0;      // per bar
  double flow_slack = 1.0;            // per flow unit
  double mode_change = 10.0;
  double operating_point_change = 1.0;

  void validate() const;
};

/// Variable and row identifiers. t is the time step (1..k).
namespace ids {
std::string pressure(const GasNetwork& n, int node, int t);
std::string inflow(const GasNetwork& n, int node, int t);
std::string pipe_in(const GasNetwork& n, int pipe, int t);
std::string pipe_out(const GasNetwork& n, int pipe, int t);
std::string valve_flow(const GasNetwork& n, int valve, int t);
std::string cs_flow(const GasNetwork& n, int cs, int t);
std::string slack(const char* kind, const GasNetwork& n, int node, int t);  // "sp+", "sp-", "sq+", "sq-"
std::string mode(const GasNetwork& n, int mode, int t);
std::string valve_open(const GasNetwork& n, int valve, int t);
std::string cs_bypass(const GasNetwork& n, int cs, int t);
std::string cs_closed(const GasNetwork& n, int cs, int t);
std::string cs_config(const GasNetwork& n, int cs, int config, int t);
std::string direction(int group, int t);
/// Disaggregated copies; state is "by", "cl" or a configuration id.
std::string copy(const char* kind, const GasNetwork& n, int cs, const std::string& state, int t);
std::string mode_change(const GasNetwork& n, int mode, int t);
std::string op_change(const GasNetwork& n, int cs, int config, int t);
}  // namespace ids

/// Velocities at both pipe ends from the initial state, m/s, floored at
/// kVelocityFloor. Throws NonpositivePressure.
[[nodiscard]] std::pair<double, double> compute_pipe_velocities(const GasNetwork& net, int pipe,
                                                                const NetworkState& initial,
                                                                const GasConstants& constants);

/// Compressibility of a pipe, evaluated at the mean initial end pressure.
[[nodiscard]] double pipe_compressibility(const Pipe& pipe, const NetworkState& initial,
                                          const GasConstants& constants);

struct PipeCoefficients {
  double continuity_flow;  // on q_out; its negative on q_in
  double gravity;          // added to both pressure coefficients of the momentum row
  double friction_in;      // on q_in
  double friction_out;     // on q_out
};

/// Coefficients of the two pipe rows. rs_t_z is R_s*T*z in SI units,
/// dt_diff the time between the two steps in seconds. Flow variables carry
/// kg_per_unit kg/s per unit; pressures pa_per_unit Pa per unit.
[[nodiscard]] PipeCoefficients pipe_coefficients(const Pipe& pipe, double rs_t_z, double gravity,
                                                 double dt_diff, double v_in, double v_out,
                                                 double kg_per_unit, double pa_per_unit);

/// Assembles the time-expanded station MILP. Rows touching t = 0 quantities
/// have those quantities moved to the right-hand side.
class ModelBuilder {
 public:
  ModelBuilder(const GasNetwork& net, const Instance& inst, ObjectiveWeights weights = {});

  /// Declares every variable of every future time step.
  void declare_variables();

  [[nodiscard]] std::vector<milp::Row> assemble_pipe_rows(int pipe, int t1, int t2) const;
  [[nodiscard]] milp::Row assemble_node_balance(int node, int t) const;
  [[nodiscard]] std::vector<milp::Row> assemble_compressor_block(int cs, int t) const;
  [[nodiscard]] std::vector<milp::Row> assemble_valve_block(int valve, int t) const;
  [[nodiscard]] std::vector<milp::Row> assemble_mode_coupling(int t) const;
  [[nodiscard]] std::vector<milp::Row> assemble_direction_rows(int t) const;
  [[nodiscard]] std::vector<milp::Row> assemble_slack_rows(int t) const;
  /// Linearised |m_t - m_{t-1}| and |copy flow_t - copy flow_{t-1}| rows.
  [[nodiscard]] std::vector<milp::Row> assemble_change_rows(int t) const;
  [[nodiscard]] std::vector<double> objective_vector() const;

  /// Everything: variables, all rows for t = 1..k, objective.
  [[nodiscard]] milp::ParametricMilp build();

  [[nodiscard]] const milp::ParametricMilp& model() const { return model_; }
  [[nodiscard]] double velocity_in(int pipe) const { return velocity_[pipe].first; }
  [[nodiscard]] double velocity_out(int pipe) const { return velocity_[pipe].second; }
  [[nodiscard]] double rs_t_z(int pipe) const { return rs_t_z_[pipe]; }

 private:
  struct Lin {
    std::vector<milp::Term> terms;
    double constant = 0.0;
  };
  void add(Lin& lin, const std::string& id, double coef) const;
  [[nodiscard]] milp::Row make_row(std::string name, Lin lin, milp::Sense sense, double rhs) const;
  [[nodiscard]] double initial_pressure(int node) const;
  [[nodiscard]] double initial_copy_flow(int cs, int config) const;
  [[nodiscard]] double cs_bound_flow(int cs) const;

  const GasNetwork& net_;
  const Instance& inst_;
  ObjectiveWeights weights_;
  milp::ParametricMilp model_;
  bool declared_ = false;
  std::vector<double> rs_t_z_;
  std::vector<std::pair<double, double>> velocity_;
};

/// Full model; when z1_fix is given the Decision block is fixed to it.
[[nodiscard]] milp::ParametricMilp build_instance_milp(
    const GasNetwork& net, const Instance& inst, const ObjectiveWeights& weights,
    const std::optional<ModeSequence>& z1_fix = std::nullopt);

/// Decision-block assignment m[o,t] = [seq[t-1] == o].
[[nodiscard]] std::map<std::string, int> mode_assignment(const GasNetwork& net,
                                                         const ModeSequence& seq);

/// Reads the chosen mode per step from a solution point (argmax of m[., t]).
[[nodiscard]] ModeSequence extract_modes(const GasNetwork& net, const milp::ParametricMilp& model,
                                         const std::vector<double>& point, int horizon);

/// State of step t (1..k) of a solved model.
[[nodiscard]] NetworkState extract_state(const GasNetwork& net, const milp::ParametricMilp& model,
                                         const std::vector<double>& point, int t);

}  // namespace gaswarm::gas

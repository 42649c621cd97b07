#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaswarm/gas/network.hpp"

namespace gaswarm::gas {

/// Values of all network quantities at one time step.
struct NetworkState {
  int mode = 0;
  std::vector<double> pressure;    // per node, bar
  std::vector<double> inflow;      // per node, zero on inner nodes
  std::vector<double> pipe_in;     // per pipe
  std::vector<double> pipe_out;
  std::vector<double> valve_flow;  // per valve
  std::vector<double> cs_flow;     // per compressor station
};

/// One operation mode index per future time step 1..k.
using ModeSequence = std::vector<int>;

/// The parameter pi of a scenario: boundary forecast, initial state and the
/// gas constants in effect.
struct Instance {
  int horizon = 0;                 // number of future steps k
  double granularity_s = 1800.0;
  /// [node][t-1] for t = 1..k; empty rows for inner nodes.
  std::vector<std::vector<double>> flow_forecast;
  std::vector<std::vector<double>> pressure_forecast;
  NetworkState initial_state;
  GasConstants constants;
};

/// Flat state: every pressure at the midpoint of the common pressure range,
/// all flows zero, the given mode.
[[nodiscard]] NetworkState flat_state(const GasNetwork& net, int mode);

/// Throws MissingForecast or GasError on shape mismatches.
void validate_instance(const GasNetwork& net, const Instance& inst);

[[nodiscard]] nlohmann::json to_json(const GasNetwork& net, const NetworkState& s);
[[nodiscard]] NetworkState state_from_json(const GasNetwork& net, const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const GasNetwork& net, const Instance& inst);
[[nodiscard]] Instance instance_from_json(const GasNetwork& net, const nlohmann::json& j);

struct StateViolation {
  std::string what;
  double amount;
};

/// Snapshot check of a single time step: node balance, valve and compressor
/// behaviour under the state's mode, and pressure/flow bounds. Pipe dynamics
/// are not part of the check.
[[nodiscard]] std::vector<StateViolation> check_state(const GasNetwork& net,
                                                      const NetworkState& s, double tol);

}  // namespace gaswarm::gas

#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace gaswarm::gas {

inline constexpr int kFormatVersion = 1;
/// Pascal per model pressure unit (bar).
inline constexpr double kPascalPerBar = 1e5;
inline constexpr double kUniversalGasConstant = 8.314462618;
/// Lower clamp for pipe velocities taken from the initial state, m/s.
inline constexpr double kVelocityFloor = 0.5;

class GasError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonpositivePressure : public GasError {
 public:
  using GasError::GasError;
};

class UnboundedBigM : public GasError {
 public:
  using GasError::GasError;
};

class MissingForecast : public GasError {
 public:
  using GasError::GasError;
};

class IncompleteMapping : public GasError {
 public:
  using GasError::GasError;
};

struct Node {
  std::string id;
  bool boundary = false;
  /// Boundary only: nominal entry (true) or exit (false).
  bool entry = false;
  /// Boundary only: fence group index.
  int group = -1;
  double p_min = 0.0;  // bar
  double p_max = 0.0;
};

struct Pipe {
  std::string id;
  int from = -1;
  int to = -1;
  double length = 0.0;    // m
  double diameter = 0.0;  // m
  double area = 0.0;      // m^2
  double slope = 0.0;
  double friction = 0.0;
  double q_min = 0.0;  // flow units, applies to both ends
  double q_max = 0.0;
};

struct Valve {
  std::string id;
  int from = -1;
  int to = -1;
  double q_min = 0.0;
  double q_max = 0.0;
};

/// Facet (a0, a1, a2, a3) reads a0*p_u + a1*p_v + a2*q + a3*m <= 0.
using Facet = std::array<double, 4>;

struct Configuration {
  std::string id;
  std::vector<Facet> facets;
};

struct CompressorStation {
  std::string id;
  int from = -1;
  int to = -1;
  /// Bypass flow may run in both directions; configurations only forward.
  double q_min = 0.0;
  double q_max = 0.0;
  std::vector<Configuration> configurations;
};

struct CsState {
  enum class Kind : std::uint8_t { Bypass, Closed, Config };
  Kind kind = Kind::Closed;
  int config = -1;

  friend bool operator==(const CsState&, const CsState&) = default;
};

struct OperationMode {
  std::string id;
  std::vector<bool> valve_open;      // indexed like GasNetwork::valves
  std::vector<CsState> cs_state;     // indexed like GasNetwork::compressors
};

/// Gas and environment constants. Temperature, molar mass and the
/// pseudo-critical point are the sampled state constants of an instance.
struct GasConstants {
  double temperature = 288.15;              // K
  double molar_mass = 0.0185;               // kg/mol
  double pseudo_critical_temperature = 195.0;  // K
  double pseudo_critical_pressure = 46.0;      // bar
  double norm_density = 0.8;                // kg/m^3 at normal conditions
  double gravity = 9.81;                    // m/s^2

  [[nodiscard]] double specific_gas_constant() const { return kUniversalGasConstant / molar_mass; }
  /// Linear compressibility fit z(p) = 1 + 0.257 p_r - 0.533 p_r / T_r.
  [[nodiscard]] double compressibility(double pressure_bar) const;
  /// kg/s carried by one flow unit (1000 normal cubic metres per hour).
  [[nodiscard]] double kg_per_s_per_flow_unit() const { return norm_density * 1000.0 / 3600.0; }
};

struct GasNetwork {
  std::string name;
  std::vector<Node> nodes;
  std::vector<Pipe> pipes;
  std::vector<Valve> valves;
  std::vector<CompressorStation> compressors;
  std::vector<OperationMode> modes;
  GasConstants constants;
  /// Magnitude bound on boundary inflow d, flow units.
  double inflow_max = 0.0;
  int num_groups = 0;

  [[nodiscard]] int node_index(const std::string& id) const;
  [[nodiscard]] int mode_index(const std::string& id) const;
  [[nodiscard]] std::vector<int> boundary_nodes() const;
  [[nodiscard]] std::vector<int> group_members(int group) const;
  [[nodiscard]] std::size_t num_arcs() const {
    return pipes.size() + valves.size() + compressors.size();
  }

  /// Throws GasError when arcs, groups or the mode mapping are inconsistent.
  void validate() const;
};

[[nodiscard]] nlohmann::json constants_to_json(const GasConstants& c);
[[nodiscard]] GasConstants constants_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const GasNetwork& net);
[[nodiscard]] GasNetwork network_from_json(const nlohmann::json& j);
[[nodiscard]] GasNetwork load_network(const std::string& path);
void save_network(const GasNetwork& net, const std::string& path);

/// Six-node station: three boundary nodes, one compressor with one
/// configuration, two valves and four operation modes.
[[nodiscard]] GasNetwork toy_station();
/// Larger template: 31 nodes, 37 arcs, 11 valves, compressors with 2 and 6
/// configurations, 56 operation modes, three fence groups of two nodes.
[[nodiscard]] GasNetwork station_d_template();
/// Looks up a built-in template by name ("toy", "station_d").
[[nodiscard]] GasNetwork network_template(const std::string& name);

}  // namespace gaswarm::gas

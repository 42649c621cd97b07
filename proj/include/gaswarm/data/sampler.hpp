#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaswarm/data/rng.hpp"
#include "gaswarm/gas/instance.hpp"
#include "gaswarm/gas/network.hpp"

namespace gaswarm::data {

class DatagenError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TooManyBoundaryGroups : public DatagenError {
 public:
  using DatagenError::DatagenError;
};

class RejectionBudgetExceeded : public DatagenError {
 public:
  using DatagenError::DatagenError;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;

  /// [lo - f (hi - lo), hi + f (hi - lo)]
  [[nodiscard]] Range padded(double f) const { return {lo - f * (hi - lo), hi + f * (hi - lo)}; }
};

/// Observed extremes of the sampled gas constants.
struct ConstantRanges {
  Range temperature{283.15, 293.15};
  Range norm_density{0.78, 0.84};
  Range molar_mass{0.0175, 0.0195};
  Range pseudo_critical_temperature{192.0, 198.0};
  Range pseudo_critical_pressure{45.5, 46.5};
};

struct SamplerConfig {
  /// Largest absolute boundary flow M_q, flow units.
  double flow_max = 400.0;
  /// Boundary pressure extremes M_p^-, M_p^+, bar.
  double pressure_min = 45.0;
  double pressure_max = 65.0;
  double flow_step_limit = 200.0;
  double fence_group_limit = 200.0;
  double pressure_step_limit = 5.0;
  double box_inflation = 1.05;
  double range_padding = 0.05;
  double switch_threshold = 0.9;
  /// Rejected draws allowed per sampler call.
  int max_rejections = 100000;
  ConstantRanges constants;

  void validate() const;
};

[[nodiscard]] nlohmann::json to_json(const SamplerConfig& c);
[[nodiscard]] SamplerConfig sampler_config_from_json(const nlohmann::json& j);
/// Reads the entry for `network` from a defaults file of the form
/// {"networks": {"<name>": {...}}}.
[[nodiscard]] SamplerConfig load_sampler_config(const std::string& path,
                                                const std::string& network);

/// Both arrays are indexed [node][t-1] like gas::Instance, with empty rows on
/// inner nodes.
struct Forecast {
  std::vector<std::vector<double>> flows;
  std::vector<std::vector<double>> pressures;
};

/// Balanced boundary flows for `horizon` future steps. Each step draws the
/// three group flows uniformly from {g : sum g = 0, |g_i| <= box_inflation *
/// flow_max} and hands a group's flow to its members whose entry/exit
/// attribute matches the sign (split evenly when several match). A step is
/// redrawn when no member matches, when a node moves by more than
/// flow_step_limit from the previous step, or when two active members of one
/// group differ by more than fence_group_limit.
[[nodiscard]] std::vector<std::vector<double>> sample_flow_forecast(const gas::GasNetwork& net,
                                                                    const SamplerConfig& config,
                                                                    int horizon,
                                                                    RandomSource& rng);

/// Uniform pressures in the padded range, each step redrawn until it is within
/// pressure_step_limit of the previous one.
[[nodiscard]] std::vector<std::vector<double>> sample_pressure_forecast(
    const gas::GasNetwork& net, const SamplerConfig& config, int horizon, RandomSource& rng);

[[nodiscard]] Forecast sample_forecast(const gas::GasNetwork& net, const SamplerConfig& config,
                                       int horizon, RandomSource& rng);

/// First mode uniform; afterwards a draw >= switch_threshold moves to a
/// uniformly chosen different mode. One draw is consumed per later step even
/// when only one mode exists.
[[nodiscard]] gas::ModeSequence sample_operation_mode_sequence(int num_modes, int horizon,
                                                               const SamplerConfig& config,
                                                               RandomSource& rng);

/// Each constant uniform in its padded range. Gravity is copied from `base`.
[[nodiscard]] gas::GasConstants sample_gas_constants(const ConstantRanges& ranges,
                                                     const SamplerConfig& config,
                                                     const gas::GasConstants& base,
                                                     RandomSource& rng);

}  // namespace gaswarm::data

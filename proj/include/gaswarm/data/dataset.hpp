#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaswarm/data/sampler.hpp"
#include "gaswarm/gas/model.hpp"
#include "gaswarm/milp/model.hpp"

namespace gaswarm::data {

/// A t = 0 state together with the gas constants it was produced under.
struct StartState {
  gas::NetworkState state;
  gas::GasConstants constants;
};

using SeedStatePool = std::vector<StartState>;

struct GenerationConfig {
  int horizon = 8;
  double granularity_s = 1800.0;
  gas::ObjectiveWeights weights;
  milp::SolveParams solve{60.0, 1e-6, 1e-4, 1e-2};
};

/// Deterministic steady-state seed: constant zero flows and mid-range
/// pressures, the first mode with a bypassed compressor (else mode 0), mid
/// gas constants, solved over the horizon; the final step is the seed.
[[nodiscard]] SeedStatePool bootstrap_seed_pool(const gas::GasNetwork& net,
                                                const SamplerConfig& sampler,
                                                const GenerationConfig& gen);

/// Instance built from a forecast, a start state and the generation shape.
[[nodiscard]] gas::Instance make_instance(const Forecast& forecast, const StartState& start,
                                          const GenerationConfig& gen);

/// Samples a forecast, gas constants, a seed state and a mode sequence,
/// solves the fixed model and returns step j of its solution. Draws that end
/// without a solution (time limit) are retried with fresh samples.
[[nodiscard]] StartState generate_initial_state(const gas::GasNetwork& net,
                                                const SeedStatePool& pool,
                                                const SamplerConfig& sampler,
                                                const GenerationConfig& gen, int j,
                                                RandomSource& rng);

struct LabelledSample {
  gas::Instance pi;
  gas::ModeSequence z1;
  double objective = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t sample_index = 0;
};

struct SampleFailure {
  std::uint64_t index = 0;
  std::string stage;  // "initial_state" or "scenario"
  std::string reason;
};

struct DatasetConfig {
  int num_states = 100;
  int num_scenarios = 2000;
  int time_step_difference = 8;
  std::uint64_t seed = 1;
  int threads = 1;
  GenerationConfig generation;
};

struct Dataset {
  std::vector<LabelledSample> samples;
  std::vector<SampleFailure> failures;
};

/// Pool of initial states, pool of forecasts, then one labelled sample per
/// scenario. Every item draws from its own (seed, stream, index) generator, so
/// the output does not depend on the thread count.
[[nodiscard]] Dataset generate_dataset(const gas::GasNetwork& net, const SamplerConfig& sampler,
                                       const DatasetConfig& config);

/// Solves the model of `pi` with the decision block fixed to z1.
[[nodiscard]] milp::MilpResult solve_fixed(const gas::GasNetwork& net, const gas::Instance& pi,
                                           const gas::ModeSequence& z1,
                                           const GenerationConfig& gen);

[[nodiscard]] nlohmann::json one_hot(const gas::GasNetwork& net, const gas::ModeSequence& z1);
[[nodiscard]] gas::ModeSequence from_one_hot(const nlohmann::json& j);

[[nodiscard]] nlohmann::json to_json(const gas::GasNetwork& net, const LabelledSample& s);
[[nodiscard]] LabelledSample sample_from_json(const gas::GasNetwork& net, const nlohmann::json& j);

/// One JSON record per line.
void write_ndjson(const gas::GasNetwork& net, const std::vector<LabelledSample>& samples,
                  const std::string& path);
[[nodiscard]] std::vector<LabelledSample> read_ndjson(const gas::GasNetwork& net,
                                                      const std::string& path);

}  // namespace gaswarm::data

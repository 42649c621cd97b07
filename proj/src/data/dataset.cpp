#include "gaswarm/data/dataset.hpp"

#include <fstream>
#include <optional>

#include "gaswarm/log.hpp"
#include "gaswarm/parallel.hpp"

namespace gaswarm::data {

using gas::GasNetwork;
using gas::Instance;
using gas::ModeSequence;

namespace {

double mid(const Range& r) { return 0.5 * (r.lo + r.hi); }

int bypass_like_mode(const GasNetwork& net) {
  for (std::size_t o = 0; o < net.modes.size(); ++o)
    for (const gas::CsState& s : net.modes[o].cs_state)
      if (s.kind == gas::CsState::Kind::Bypass) return static_cast<int>(o);
  return 0;
}

}  // namespace

milp::MilpResult solve_fixed(const GasNetwork& net, const Instance& pi, const ModeSequence& z1,
                             const GenerationConfig& gen) {
  const milp::ParametricMilp model = gas::build_instance_milp(net, pi, gen.weights, z1);
  return milp::solve_milp(model, gen.solve);
}

Instance make_instance(const Forecast& forecast, const StartState& start,
                       const GenerationConfig& gen) {
  Instance inst;
  inst.horizon = gen.horizon;
  inst.granularity_s = gen.granularity_s;
  inst.flow_forecast = forecast.flows;
  inst.pressure_forecast = forecast.pressures;
  inst.initial_state = start.state;
  inst.constants = start.constants;
  return inst;
}

SeedStatePool bootstrap_seed_pool(const GasNetwork& net, const SamplerConfig& sampler,
                                  const GenerationConfig& gen) {
  const int mode = bypass_like_mode(net);
  StartState start;
  start.state = gas::flat_state(net, mode);
  start.constants = net.constants;
  start.constants.temperature = mid(sampler.constants.temperature);
  start.constants.norm_density = mid(sampler.constants.norm_density);
  start.constants.molar_mass = mid(sampler.constants.molar_mass);
  start.constants.pseudo_critical_temperature = mid(sampler.constants.pseudo_critical_temperature);
  start.constants.pseudo_critical_pressure = mid(sampler.constants.pseudo_critical_pressure);

  Forecast steady;
  steady.flows.assign(net.nodes.size(), {});
  steady.pressures.assign(net.nodes.size(), {});
  const double p_mid = 0.5 * (sampler.pressure_min + sampler.pressure_max);
  for (int v : net.boundary_nodes()) {
    steady.flows[v].assign(gen.horizon, 0.0);
    steady.pressures[v].assign(gen.horizon, p_mid);
  }
  const Instance inst = make_instance(steady, start, gen);
  const ModeSequence z1(gen.horizon, mode);
  const milp::ParametricMilp model = gas::build_instance_milp(net, inst, gen.weights, z1);
  const milp::MilpResult res = milp::solve_milp(model, gen.solve);
  if (!res.has_solution()) throw DatagenError("steady-state seed solve found no solution");
  StartState seed{gas::extract_state(net, model, res.point, gen.horizon), start.constants};
  return {seed};
}

StartState generate_initial_state(const GasNetwork& net, const SeedStatePool& pool,
                                  const SamplerConfig& sampler, const GenerationConfig& gen,
                                  int j, RandomSource& rng) {
  if (pool.empty()) throw DatagenError("empty seed-state pool");
  if (j < 1 || j > gen.horizon)
    throw DatagenError("time-step distance " + std::to_string(j) + " outside 1.." +
                       std::to_string(gen.horizon));
  for (int attempt = 0;; ++attempt) {
    const Forecast forecast = sample_forecast(net, sampler, gen.horizon, rng);
    StartState start;
    start.constants = sample_gas_constants(sampler.constants, sampler, net.constants, rng);
    start.state = pool[rng.below(pool.size())].state;
    const ModeSequence z1 =
        sample_operation_mode_sequence(static_cast<int>(net.modes.size()), gen.horizon, sampler,
                                       rng);
    const Instance inst = make_instance(forecast, start, gen);
    const milp::ParametricMilp model = gas::build_instance_milp(net, inst, gen.weights, z1);
    const milp::MilpResult res = milp::solve_milp(model, gen.solve);
    if (res.has_solution())
      return {gas::extract_state(net, model, res.point, j), start.constants};
    if (attempt >= sampler.max_rejections)
      throw RejectionBudgetExceeded("initial state: no solved draw within the budget");
    log::warning("initial state draw without solution ({}), resampling",
                 milp::to_string(res.status));
  }
}

Dataset generate_dataset(const GasNetwork& net, const SamplerConfig& sampler,
                         const DatasetConfig& config) {
  if (config.num_states < 1 || config.num_scenarios < 1)
    throw DatagenError("num_states and num_scenarios must be at least 1");
  const GenerationConfig& gen = config.generation;
  const SeedStatePool seeds = bootstrap_seed_pool(net, sampler, gen);

  std::vector<std::optional<StartState>> states(config.num_states);
  std::vector<std::optional<SampleFailure>> state_fail(config.num_states);
  parallel_for(states.size(), config.threads, [&](std::size_t i) {
    SplitMix64 rng = SplitMix64::stream(config.seed, kStreamInitialState, i);
    try {
      states[i] = generate_initial_state(net, seeds, sampler, gen, config.time_step_difference,
                                         rng);
    } catch (const std::exception& e) {
      state_fail[i] = SampleFailure{i, "initial_state", e.what()};
    }
  });

  Dataset out;
  SeedStatePool pool;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i]) pool.push_back(*states[i]);
    if (state_fail[i]) out.failures.push_back(*state_fail[i]);
  }
  if (pool.empty()) throw DatagenError("no initial state could be generated");

  const auto n = static_cast<std::size_t>(config.num_scenarios);
  std::vector<std::optional<Forecast>> forecasts(n);
  std::vector<std::optional<SampleFailure>> fail(n);
  parallel_for(n, config.threads, [&](std::size_t i) {
    SplitMix64 rng = SplitMix64::stream(config.seed, kStreamForecast, i);
    try {
      forecasts[i] = sample_forecast(net, sampler, gen.horizon, rng);
    } catch (const std::exception& e) {
      fail[i] = SampleFailure{i, "forecast", e.what()};
    }
  });

  std::vector<std::optional<LabelledSample>> samples(n);
  parallel_for(n, config.threads, [&](std::size_t i) {
    if (!forecasts[i]) return;
    SplitMix64 rng = SplitMix64::stream(config.seed, kStreamScenario, i);
    try {
      LabelledSample s;
      s.z1 = sample_operation_mode_sequence(static_cast<int>(net.modes.size()), gen.horizon,
                                            sampler, rng);
      s.pi = make_instance(*forecasts[i], pool[rng.below(pool.size())], gen);
      const milp::MilpResult res = solve_fixed(net, s.pi, s.z1, gen);
      if (res.status != milp::SolveStatus::Optimal) {
        fail[i] = SampleFailure{i, "scenario",
                                std::string("fixed model ended ") + milp::to_string(res.status)};
        return;
      }
      s.objective = res.objective;
      s.seed = config.seed;
      s.sample_index = i;
      samples[i] = std::move(s);
    } catch (const std::exception& e) {
      fail[i] = SampleFailure{i, "scenario", e.what()};
    }
  });

  for (std::size_t i = 0; i < n; ++i) {
    if (samples[i]) out.samples.push_back(std::move(*samples[i]));
    if (fail[i]) {
      log::warning("sample {} skipped at {}: {}", i, fail[i]->stage, fail[i]->reason);
      out.failures.push_back(*fail[i]);
    }
  }
  return out;
}

nlohmann::json one_hot(const GasNetwork& net, const ModeSequence& z1) {
  nlohmann::json rows = nlohmann::json::array();
  for (int mode : z1) {
    std::vector<int> row(net.modes.size(), 0);
    row.at(mode) = 1;
    rows.push_back(row);
  }
  return rows;
}

ModeSequence from_one_hot(const nlohmann::json& j) {
  ModeSequence seq;
  for (const auto& row : j) {
    int chosen = -1;
    for (std::size_t o = 0; o < row.size(); ++o) {
      const int bit = row[o].get<int>();
      if (bit != 0 && bit != 1) throw DatagenError("one-hot entry is not 0/1");
      if (bit == 1) {
        if (chosen >= 0) throw DatagenError("one-hot row has several ones");
        chosen = static_cast<int>(o);
      }
    }
    if (chosen < 0) throw DatagenError("one-hot row has no one");
    seq.push_back(chosen);
  }
  return seq;
}

nlohmann::json to_json(const GasNetwork& net, const LabelledSample& s) {
  return {{"pi", gas::to_json(net, s.pi)},
          {"z1", one_hot(net, s.z1)},
          {"objective", s.objective},
          {"seed", s.seed},
          {"sample_index", s.sample_index}};
}

LabelledSample sample_from_json(const GasNetwork& net, const nlohmann::json& j) {
  LabelledSample s;
  try {
    s.pi = gas::instance_from_json(net, j.at("pi"));
    s.z1 = from_one_hot(j.at("z1"));
    s.objective = j.at("objective").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.sample_index = j.at("sample_index").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DatagenError(std::string("labelled sample: ") + e.what());
  }
  if (static_cast<int>(s.z1.size()) != s.pi.horizon)
    throw DatagenError("z1 length differs from the instance horizon");
  for (int mode : s.z1)
    if (mode >= static_cast<int>(net.modes.size())) throw DatagenError("z1 mode out of range");
  return s;
}

void write_ndjson(const GasNetwork& net, const std::vector<LabelledSample>& samples,
                  const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatagenError("cannot write " + path);
  for (const LabelledSample& s : samples) out << to_json(net, s).dump() << '\n';
  if (!out) throw DatagenError("write failed: " + path);
}

std::vector<LabelledSample> read_ndjson(const GasNetwork& net, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatagenError("cannot open " + path);
  std::vector<LabelledSample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(sample_from_json(net, nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw DatagenError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace gaswarm::data

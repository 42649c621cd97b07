#include "gaswarm/data/sampler.hpp"

#include <cmath>
#include <fstream>

namespace gaswarm::data {

using gas::GasNetwork;

void SamplerConfig::validate() const {
  if (!(flow_max > 0.0)) throw DatagenError("flow_max must be positive");
  if (!(pressure_min <= pressure_max)) throw DatagenError("pressure_min exceeds pressure_max");
  if (!(flow_step_limit > 0.0 && fence_group_limit > 0.0 && pressure_step_limit > 0.0))
    throw DatagenError("step limits must be positive");
  if (!(box_inflation > 0.0) || !(range_padding >= 0.0))
    throw DatagenError("box_inflation must be positive and range_padding nonnegative");
  if (!(switch_threshold > 0.0 && switch_threshold < 1.0))
    throw DatagenError("switch_threshold must lie in (0, 1)");
  if (max_rejections < 0) throw DatagenError("max_rejections must be nonnegative");
  for (const Range* r : {&constants.temperature, &constants.norm_density, &constants.molar_mass,
                         &constants.pseudo_critical_temperature,
                         &constants.pseudo_critical_pressure})
    if (!(r->lo <= r->hi) || !(r->lo > 0.0)) throw DatagenError("invalid constant range");
}

namespace {

nlohmann::json range_json(const Range& r) { return {r.lo, r.hi}; }

Range range_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw DatagenError("range must be [lo, hi]");
  return {j[0].get<double>(), j[1].get<double>()};
}

class Budget {
 public:
  Budget(int limit, const char* what) : left_(limit), what_(what) {}
  void reject() {
    if (left_-- <= 0)
      throw RejectionBudgetExceeded(std::string(what_) + ": rejection budget exhausted");
  }

 private:
  int left_;
  const char* what_;
};

}  // namespace

nlohmann::json to_json(const SamplerConfig& c) {
  return {{"flow_max", c.flow_max},
          {"pressure_range", {c.pressure_min, c.pressure_max}},
          {"flow_step_limit", c.flow_step_limit},
          {"fence_group_limit", c.fence_group_limit},
          {"pressure_step_limit", c.pressure_step_limit},
          {"box_inflation", c.box_inflation},
          {"range_padding", c.range_padding},
          {"switch_threshold", c.switch_threshold},
          {"max_rejections", c.max_rejections},
          {"constants",
           {{"temperature", range_json(c.constants.temperature)},
            {"norm_density", range_json(c.constants.norm_density)},
            {"molar_mass", range_json(c.constants.molar_mass)},
            {"pseudo_critical_temperature", range_json(c.constants.pseudo_critical_temperature)},
            {"pseudo_critical_pressure", range_json(c.constants.pseudo_critical_pressure)}}}};
}

SamplerConfig sampler_config_from_json(const nlohmann::json& j) {
  SamplerConfig c;
  try {
    c.flow_max = j.at("flow_max").get<double>();
    const Range p = range_from(j.at("pressure_range"));
    c.pressure_min = p.lo;
    c.pressure_max = p.hi;
    c.flow_step_limit = j.value("flow_step_limit", c.flow_step_limit);
    c.fence_group_limit = j.value("fence_group_limit", c.fence_group_limit);
    c.pressure_step_limit = j.value("pressure_step_limit", c.pressure_step_limit);
    c.box_inflation = j.value("box_inflation", c.box_inflation);
    c.range_padding = j.value("range_padding", c.range_padding);
    c.switch_threshold = j.value("switch_threshold", c.switch_threshold);
    c.max_rejections = j.value("max_rejections", c.max_rejections);
    if (j.contains("constants")) {
      const auto& k = j.at("constants");
      c.constants.temperature = range_from(k.at("temperature"));
      c.constants.norm_density = range_from(k.at("norm_density"));
      c.constants.molar_mass = range_from(k.at("molar_mass"));
      c.constants.pseudo_critical_temperature = range_from(k.at("pseudo_critical_temperature"));
      c.constants.pseudo_critical_pressure = range_from(k.at("pseudo_critical_pressure"));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DatagenError(std::string("sampler config: ") + e.what());
  }
  c.validate();
  return c;
}

SamplerConfig load_sampler_config(const std::string& path, const std::string& network) {
  std::ifstream in(path);
  if (!in) throw DatagenError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DatagenError(path + ": " + e.what());
  }
  const auto& nets = j.at("networks");
  if (!nets.contains(network)) throw DatagenError(path + " has no entry for " + network);
  return sampler_config_from_json(nets.at(network));
}

std::vector<std::vector<double>> sample_flow_forecast(const GasNetwork& net,
                                                      const SamplerConfig& config, int horizon,
                                                      RandomSource& rng) {
  if (net.num_groups > 3)
    throw TooManyBoundaryGroups(net.name + " has " + std::to_string(net.num_groups) +
                                " fence groups, the sampler handles 3");
  if (net.num_groups < 3) throw DatagenError("flow sampling needs exactly 3 fence groups");
  std::vector<std::vector<int>> members(3);
  for (int g = 0; g < 3; ++g) members[g] = net.group_members(g);

  const double box = config.box_inflation * config.flow_max;
  std::vector<std::vector<double>> flows(net.nodes.size());
  std::vector<double> step(net.nodes.size(), 0.0);
  Budget budget(config.max_rejections, "flow forecast");

  for (int t = 0; t < horizon; ++t) {
    for (;;) {
      const double g0 = rng.uniform(-box, box);
      const double g1 = rng.uniform(-box, box);
      const double g2 = -g0 - g1;
      if (std::abs(g2) > box) {
        budget.reject();
        continue;
      }
      const double group_flow[3] = {g0, g1, g2};
      bool ok = true;
      for (int g = 0; g < 3 && ok; ++g) {
        std::vector<int> active;
        for (int v : members[g])
          if (group_flow[g] != 0.0 && net.nodes[v].entry == (group_flow[g] > 0.0))
            active.push_back(v);
        for (int v : members[g]) step[v] = 0.0;
        if (group_flow[g] == 0.0) continue;
        if (active.empty()) {
          ok = false;
          break;
        }
        const double share = group_flow[g] / static_cast<double>(active.size());
        for (int v : active) step[v] = share;
        for (int v : active)
          for (int w : active)
            if (std::abs(step[v] - step[w]) > config.fence_group_limit) ok = false;
      }
      if (ok && t > 0)
        for (int v : net.boundary_nodes())
          if (std::abs(step[v] - flows[v].back()) > config.flow_step_limit) ok = false;
      if (!ok) {
        budget.reject();
        continue;
      }
      break;
    }
    for (int v : net.boundary_nodes()) flows[v].push_back(step[v]);
  }
  return flows;
}

std::vector<std::vector<double>> sample_pressure_forecast(const GasNetwork& net,
                                                          const SamplerConfig& config, int horizon,
                                                          RandomSource& rng) {
  const Range r = Range{config.pressure_min, config.pressure_max}.padded(config.range_padding);
  std::vector<std::vector<double>> pressures(net.nodes.size());
  Budget budget(config.max_rejections, "pressure forecast");
  for (int v : net.boundary_nodes()) {
    for (int t = 0; t < horizon; ++t) {
      double p = rng.uniform(r.lo, r.hi);
      while (t > 0 && std::abs(p - pressures[v].back()) > config.pressure_step_limit) {
        budget.reject();
        p = rng.uniform(r.lo, r.hi);
      }
      pressures[v].push_back(p);
    }
  }
  return pressures;
}

Forecast sample_forecast(const GasNetwork& net, const SamplerConfig& config, int horizon,
                         RandomSource& rng) {
  Forecast f;
  f.flows = sample_flow_forecast(net, config, horizon, rng);
  f.pressures = sample_pressure_forecast(net, config, horizon, rng);
  return f;
}

gas::ModeSequence sample_operation_mode_sequence(int num_modes, int horizon,
                                                 const SamplerConfig& config, RandomSource& rng) {
  if (num_modes < 1) throw DatagenError("no operation modes to sample from");
  gas::ModeSequence seq;
  if (horizon <= 0) return seq;
  const auto n = static_cast<std::size_t>(num_modes);
  int mode = static_cast<int>(rng.below(n));
  seq.push_back(mode);
  for (int t = 1; t < horizon; ++t) {
    if (rng.uniform() >= config.switch_threshold && num_modes > 1) {
      const int other = static_cast<int>(rng.below(n - 1));
      mode = other >= mode ? other + 1 : other;
    }
    seq.push_back(mode);
  }
  return seq;
}

gas::GasConstants sample_gas_constants(const ConstantRanges& ranges, const SamplerConfig& config,
                                       const gas::GasConstants& base, RandomSource& rng) {
  auto draw = [&](const Range& r) {
    const Range p = r.padded(config.range_padding);
    return rng.uniform(p.lo, p.hi);
  };
  gas::GasConstants c = base;
  c.temperature = draw(ranges.temperature);
  c.norm_density = draw(ranges.norm_density);
  c.molar_mass = draw(ranges.molar_mass);
  c.pseudo_critical_temperature = draw(ranges.pseudo_critical_temperature);
  c.pseudo_critical_pressure = draw(ranges.pseudo_critical_pressure);
  return c;
}

}  // namespace gaswarm::data

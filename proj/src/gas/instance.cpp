#include "gaswarm/gas/instance.hpp"

#include <algorithm>
#include <cmath>

namespace gaswarm::gas {

using nlohmann::json;

NetworkState flat_state(const GasNetwork& net, int mode) {
  double lo = 0.0, hi = 1e300;
  for (const Node& v : net.nodes) {
    lo = std::max(lo, v.p_min);
    hi = std::min(hi, v.p_max);
  }
  if (lo > hi) throw GasError("node pressure ranges have no common value");
  NetworkState s;
  s.mode = mode;
  s.pressure.assign(net.nodes.size(), 0.5 * (lo + hi));
  s.inflow.assign(net.nodes.size(), 0.0);
  s.pipe_in.assign(net.pipes.size(), 0.0);
  s.pipe_out.assign(net.pipes.size(), 0.0);
  s.valve_flow.assign(net.valves.size(), 0.0);
  s.cs_flow.assign(net.compressors.size(), 0.0);
  return s;
}

namespace {

void check_state_shape(const GasNetwork& net, const NetworkState& s) {
  if (s.pressure.size() != net.nodes.size() || s.inflow.size() != net.nodes.size() ||
      s.pipe_in.size() != net.pipes.size() || s.pipe_out.size() != net.pipes.size() ||
      s.valve_flow.size() != net.valves.size() || s.cs_flow.size() != net.compressors.size())
    throw GasError("state does not match the network");
  if (s.mode < 0 || s.mode >= static_cast<int>(net.modes.size()))
    throw GasError("state names an unknown operation mode");
}

json keyed(const std::vector<double>& values, const auto& items) {
  json j = json::object();
  for (std::size_t i = 0; i < items.size(); ++i) j[items[i].id] = values[i];
  return j;
}

std::vector<double> unkeyed(const json& j, const auto& items, const char* what) {
  std::vector<double> out;
  for (const auto& item : items) {
    if (!j.contains(item.id)) throw GasError(std::string(what) + " misses " + item.id);
    out.push_back(j.at(item.id).template get<double>());
  }
  return out;
}

}  // namespace

void validate_instance(const GasNetwork& net, const Instance& inst) {
  if (inst.horizon < 1) throw GasError("horizon must be at least one step");
  if (!(inst.granularity_s > 0)) throw GasError("granularity must be positive");
  if (inst.flow_forecast.size() != net.nodes.size() ||
      inst.pressure_forecast.size() != net.nodes.size())
    throw MissingForecast("forecast tables must have one row per node");
  for (std::size_t v = 0; v < net.nodes.size(); ++v) {
    const std::size_t want = net.nodes[v].boundary ? static_cast<std::size_t>(inst.horizon) : 0;
    if (inst.flow_forecast[v].size() != want || inst.pressure_forecast[v].size() != want)
      throw MissingForecast("forecast for node " + net.nodes[v].id + " does not cover the horizon");
  }
  check_state_shape(net, inst.initial_state);
  for (double p : inst.initial_state.pressure)
    if (!(p > 0)) throw NonpositivePressure("initial state has a nonpositive pressure");
}

json to_json(const GasNetwork& net, const NetworkState& s) {
  std::vector<Node> boundary;
  std::vector<double> inflow;
  for (int v : net.boundary_nodes()) {
    boundary.push_back(net.nodes[v]);
    inflow.push_back(s.inflow[v]);
  }
  return {{"mode", net.modes.at(s.mode).id},
          {"pressure", keyed(s.pressure, net.nodes)},
          {"inflow", keyed(inflow, boundary)},
          {"pipe_in", keyed(s.pipe_in, net.pipes)},
          {"pipe_out", keyed(s.pipe_out, net.pipes)},
          {"valve_flow", keyed(s.valve_flow, net.valves)},
          {"cs_flow", keyed(s.cs_flow, net.compressors)}};
}

NetworkState state_from_json(const GasNetwork& net, const json& j) {
  NetworkState s;
  s.mode = net.mode_index(j.at("mode"));
  s.pressure = unkeyed(j.at("pressure"), net.nodes, "pressure");
  s.inflow.assign(net.nodes.size(), 0.0);
  for (int v : net.boundary_nodes()) s.inflow[v] = j.at("inflow").at(net.nodes[v].id).get<double>();
  s.pipe_in = unkeyed(j.at("pipe_in"), net.pipes, "pipe_in");
  s.pipe_out = unkeyed(j.at("pipe_out"), net.pipes, "pipe_out");
  s.valve_flow = unkeyed(j.at("valve_flow"), net.valves, "valve_flow");
  s.cs_flow = unkeyed(j.at("cs_flow"), net.compressors, "cs_flow");
  return s;
}

json to_json(const GasNetwork& net, const Instance& inst) {
  json flows = json::object(), pressures = json::object();
  for (int v : net.boundary_nodes()) {
    flows[net.nodes[v].id] = inst.flow_forecast[v];
    pressures[net.nodes[v].id] = inst.pressure_forecast[v];
  }
  return {{"format_version", kFormatVersion},
          {"horizon", inst.horizon},
          {"granularity_s", inst.granularity_s},
          {"flow_forecast", flows},
          {"pressure_forecast", pressures},
          {"initial_state", to_json(net, inst.initial_state)},
          {"constants", constants_to_json(inst.constants)}};
}

Instance instance_from_json(const GasNetwork& net, const json& j) {
  if (j.value("format_version", -1) != kFormatVersion)
    throw GasError("unsupported instance format_version");
  Instance inst;
  inst.horizon = j.at("horizon");
  inst.granularity_s = j.at("granularity_s");
  inst.flow_forecast.assign(net.nodes.size(), {});
  inst.pressure_forecast.assign(net.nodes.size(), {});
  for (int v : net.boundary_nodes()) {
    const std::string& id = net.nodes[v].id;
    if (!j.at("flow_forecast").contains(id) || !j.at("pressure_forecast").contains(id))
      throw MissingForecast("no forecast for boundary node " + id);
    inst.flow_forecast[v] = j.at("flow_forecast").at(id).get<std::vector<double>>();
    inst.pressure_forecast[v] = j.at("pressure_forecast").at(id).get<std::vector<double>>();
  }
  inst.initial_state = state_from_json(net, j.at("initial_state"));
  inst.constants = j.contains("constants") ? constants_from_json(j.at("constants")) : net.constants;
  validate_instance(net, inst);
  return inst;
}

std::vector<StateViolation> check_state(const GasNetwork& net, const NetworkState& s, double tol) {
  check_state_shape(net, s);
  std::vector<StateViolation> out;
  auto report = [&](const std::string& what, double amount) {
    if (amount > tol) out.push_back({what, amount});
  };
  auto outside = [](double x, double lo, double hi) { return std::max({lo - x, x - hi, 0.0}); };

  std::vector<double> balance(net.nodes.size(), 0.0);
  for (std::size_t v = 0; v < net.nodes.size(); ++v) {
    const Node& n = net.nodes[v];
    report("pressure bound " + n.id, outside(s.pressure[v], n.p_min, n.p_max));
    if (n.boundary) {
      report("inflow bound " + n.id, outside(s.inflow[v], -net.inflow_max, net.inflow_max));
      balance[v] += s.inflow[v];
    } else {
      report("inflow on inner node " + n.id, std::abs(s.inflow[v]));
    }
  }
  for (std::size_t a = 0; a < net.pipes.size(); ++a) {
    const Pipe& p = net.pipes[a];
    report("pipe bound " + p.id, outside(s.pipe_in[a], p.q_min, p.q_max));
    report("pipe bound " + p.id, outside(s.pipe_out[a], p.q_min, p.q_max));
    balance[p.to] += s.pipe_out[a];
    balance[p.from] -= s.pipe_in[a];
  }
  const OperationMode& mode = net.modes.at(s.mode);
  for (std::size_t a = 0; a < net.valves.size(); ++a) {
    const Valve& va = net.valves[a];
    const double q = s.valve_flow[a];
    balance[va.to] += q;
    balance[va.from] -= q;
    if (mode.valve_open[a]) {
      report("open valve pressure " + va.id, std::abs(s.pressure[va.from] - s.pressure[va.to]));
      report("valve bound " + va.id, outside(q, va.q_min, va.q_max));
    } else {
      report("closed valve flow " + va.id, std::abs(q));
    }
  }
  for (std::size_t a = 0; a < net.compressors.size(); ++a) {
    const CompressorStation& cs = net.compressors[a];
    const double q = s.cs_flow[a];
    const double pu = s.pressure[cs.from], pv = s.pressure[cs.to];
    balance[cs.to] += q;
    balance[cs.from] -= q;
    const CsState st = mode.cs_state[a];
    switch (st.kind) {
      case CsState::Kind::Closed: report("closed compressor flow " + cs.id, std::abs(q)); break;
      case CsState::Kind::Bypass:
        report("bypass pressure " + cs.id, std::abs(pu - pv));
        report("compressor bound " + cs.id, outside(q, cs.q_min, cs.q_max));
        break;
      case CsState::Kind::Config:
        report("compressor bound " + cs.id, outside(q, 0.0, cs.q_max));
        for (const Facet& f : cs.configurations[st.config].facets)
          report("facet " + cs.id, f[0] * pu + f[1] * pv + f[2] * q + f[3]);
        break;
    }
  }
  for (std::size_t v = 0; v < net.nodes.size(); ++v)
    report("balance " + net.nodes[v].id, std::abs(balance[v]));
  return out;
}

}  // namespace gaswarm::gas

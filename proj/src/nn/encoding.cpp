#include "gaswarm/nn/encoding.hpp"

#include <algorithm>

namespace gaswarm::nn {

nlohmann::json EncodingLayout::to_json() const {
  nlohmann::json refs = nlohmann::json::array();
  for (const auto& r : kConstantRefs) refs.push_back({r[0], r[1]});
  return {{"streams", {"flow", "pressure", "state", "modes"}},
          {"state_order", {"node_pressure", "boundary_inflow", "pipe_in", "pipe_out",
                           "valve_flow", "cs_flow", "mode_one_hot", "constants"}},
          {"boundary", boundary},
          {"nodes", nodes},
          {"pipes", pipes},
          {"valves", valves},
          {"compressors", compressors},
          {"modes", modes},
          {"flow_scale", flow_scale},
          {"pressure_mid", pressure_mid},
          {"pressure_half", pressure_half},
          {"constant_refs", refs}};
}

EncodingLayout EncodingLayout::from_json(const nlohmann::json& j) {
  EncodingLayout l;
  l.boundary = j.at("boundary");
  l.nodes = j.at("nodes");
  l.pipes = j.at("pipes");
  l.valves = j.at("valves");
  l.compressors = j.at("compressors");
  l.modes = j.at("modes");
  l.flow_scale = j.at("flow_scale");
  l.pressure_mid = j.at("pressure_mid");
  l.pressure_half = j.at("pressure_half");
  return l;
}

EncodingLayout make_layout(const gas::GasNetwork& net) {
  EncodingLayout l;
  l.boundary = static_cast<int>(net.boundary_nodes().size());
  l.nodes = static_cast<int>(net.nodes.size());
  l.pipes = static_cast<int>(net.pipes.size());
  l.valves = static_cast<int>(net.valves.size());
  l.compressors = static_cast<int>(net.compressors.size());
  l.modes = static_cast<int>(net.modes.size());
  l.flow_scale = net.inflow_max > 0.0 ? net.inflow_max : 1.0;
  double lo = net.nodes.empty() ? 0.0 : net.nodes[0].p_min;
  double hi = net.nodes.empty() ? 1.0 : net.nodes[0].p_max;
  for (const gas::Node& n : net.nodes) {
    lo = std::min(lo, n.p_min);
    hi = std::max(hi, n.p_max);
  }
  l.pressure_mid = 0.5 * (lo + hi);
  l.pressure_half = hi > lo ? 0.5 * (hi - lo) : 1.0;
  return l;
}

EncodedBatch encode(const gas::GasNetwork& net, const EncodingLayout& layout,
                    const std::vector<const gas::Instance*>& batch) {
  if (batch.empty()) throw ShapeMismatch("encode: empty batch");
  if (make_layout(net) != layout) throw ShapeMismatch("encode: layout does not match network");
  const int k = batch[0]->horizon;
  const int n = static_cast<int>(batch.size());
  const std::vector<int> bnodes = net.boundary_nodes();
  EncodedBatch e{Tensor({n, layout.boundary, k}), Tensor({n, layout.boundary, k}),
                 Tensor({n, layout.state_width(), k})};
  const double fs = layout.flow_scale;
  auto pscale = [&](double p) { return (p - layout.pressure_mid) / layout.pressure_half; };

  std::vector<double> s;
  for (int b = 0; b < n; ++b) {
    const gas::Instance& inst = *batch[b];
    if (inst.horizon != k) throw ShapeMismatch("encode: instances differ in horizon");
    for (int i = 0; i < layout.boundary; ++i) {
      const int v = bnodes[i];
      for (int t = 0; t < k; ++t) {
        e.flow.at(b, i, t) = inst.flow_forecast.at(v).at(t) / fs;
        e.pressure.at(b, i, t) = pscale(inst.pressure_forecast.at(v).at(t));
      }
    }
    const gas::NetworkState& st = inst.initial_state;
    s.clear();
    for (double p : st.pressure) s.push_back(pscale(p));
    for (int v : bnodes) s.push_back(st.inflow.at(v) / fs);
    for (double q : st.pipe_in) s.push_back(q / fs);
    for (double q : st.pipe_out) s.push_back(q / fs);
    for (double q : st.valve_flow) s.push_back(q / fs);
    for (double q : st.cs_flow) s.push_back(q / fs);
    for (int o = 0; o < layout.modes; ++o) s.push_back(o == st.mode ? 1.0 : 0.0);
    const gas::GasConstants& c = inst.constants;
    const double raw[5] = {c.temperature, c.norm_density, c.molar_mass,
                           c.pseudo_critical_temperature, c.pseudo_critical_pressure};
    for (int i = 0; i < 5; ++i) s.push_back((raw[i] - kConstantRefs[i][0]) / kConstantRefs[i][1]);
    if (static_cast<int>(s.size()) != layout.state_width())
      throw ShapeMismatch("encode: initial state does not match the network");
    for (int i = 0; i < layout.state_width(); ++i)
      for (int t = 0; t < k; ++t) e.state.at(b, i, t) = s[i];
  }
  e.flow.require_finite("flow encoding");
  e.pressure.require_finite("pressure encoding");
  e.state.require_finite("state encoding");
  return e;
}

Tensor encode_modes(const std::vector<const gas::ModeSequence*>& seqs, int modes) {
  if (seqs.empty()) throw ShapeMismatch("encode_modes: empty batch");
  const int k = static_cast<int>(seqs[0]->size());
  Tensor z({static_cast<int>(seqs.size()), modes, k});
  for (std::size_t b = 0; b < seqs.size(); ++b) {
    if (static_cast<int>(seqs[b]->size()) != k) throw ShapeMismatch("mode sequences differ in length");
    for (int t = 0; t < k; ++t) {
      const int o = (*seqs[b])[t];
      if (o < 0 || o >= modes) throw ShapeMismatch("mode index out of range");
      z.at(static_cast<int>(b), o, t) = 1.0;
    }
  }
  return z;
}

}  // namespace gaswarm::nn

#include "gaswarm/gas/network.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

namespace gaswarm::gas {

using nlohmann::json;

double GasConstants::compressibility(double pressure_bar) const {
  const double pr = pressure_bar / pseudo_critical_pressure;
  const double tr = temperature / pseudo_critical_temperature;
  return 1.0 + 0.257 * pr - 0.533 * pr / tr;
}

int GasNetwork::node_index(const std::string& id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id == id) return static_cast<int>(i);
  throw GasError("unknown node: " + id);
}

int GasNetwork::mode_index(const std::string& id) const {
  for (std::size_t i = 0; i < modes.size(); ++i)
    if (modes[i].id == id) return static_cast<int>(i);
  throw GasError("unknown operation mode: " + id);
}

std::vector<int> GasNetwork::boundary_nodes() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].boundary) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> GasNetwork::group_members(int group) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].boundary && nodes[i].group == group) out.push_back(static_cast<int>(i));
  return out;
}

void GasNetwork::validate() const {
  const int n = static_cast<int>(nodes.size());
  std::set<std::string> seen;
  for (const Node& v : nodes) {
    if (!seen.insert(v.id).second) throw GasError("duplicate node id " + v.id);
    if (!(v.p_min > 0.0) || v.p_min > v.p_max) throw GasError("bad pressure bounds at " + v.id);
    if (v.boundary && (v.group < 0 || v.group >= num_groups))
      throw GasError("boundary node " + v.id + " has no fence group");
    if (!v.boundary && v.group != -1) throw GasError("inner node " + v.id + " carries a group");
  }
  for (int g = 0; g < num_groups; ++g)
    if (group_members(g).empty()) throw GasError("empty fence group " + std::to_string(g));
  auto check_arc = [&](const std::string& id, int from, int to, double lo, double hi) {
    if (from < 0 || from >= n || to < 0 || to >= n || from == to)
      throw GasError("arc " + id + " references invalid nodes");
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi)
      throw GasError("arc " + id + " needs finite flow bounds");
  };
  for (const Pipe& p : pipes) {
    check_arc(p.id, p.from, p.to, p.q_min, p.q_max);
    if (!(p.length > 0 && p.diameter > 0 && p.area > 0 && p.friction > 0))
      throw GasError("pipe " + p.id + " needs positive geometry and friction");
  }
  for (const Valve& v : valves) check_arc(v.id, v.from, v.to, v.q_min, v.q_max);
  for (const CompressorStation& c : compressors) {
    check_arc(c.id, c.from, c.to, c.q_min, c.q_max);
    if (c.configurations.empty()) throw GasError("compressor " + c.id + " has no configuration");
    for (const Configuration& cfg : c.configurations) {
      if (cfg.facets.empty()) throw GasError("configuration " + cfg.id + " has no facet");
      for (const Facet& f : cfg.facets)
        for (double a : f)
          if (!std::isfinite(a)) throw GasError("non-finite facet in " + cfg.id);
    }
  }
  if (modes.empty()) throw GasError("network has no operation mode");
  for (const OperationMode& o : modes) {
    if (o.valve_open.size() != valves.size() || o.cs_state.size() != compressors.size())
      throw GasError("operation mode " + o.id + " does not cover every element");
    for (std::size_t a = 0; a < compressors.size(); ++a) {
      const CsState& s = o.cs_state[a];
      if (s.kind == CsState::Kind::Config &&
          (s.config < 0 || s.config >= static_cast<int>(compressors[a].configurations.size())))
        throw GasError("operation mode " + o.id + " names an unknown configuration");
    }
  }
  if (!(inflow_max > 0.0)) throw GasError("inflow_max must be positive");
}

// ---------------------------------------------------------------- json

namespace {

json constants_json(const GasConstants& c) {
  return {{"temperature", c.temperature},
          {"molar_mass", c.molar_mass},
          {"pseudo_critical_temperature", c.pseudo_critical_temperature},
          {"pseudo_critical_pressure", c.pseudo_critical_pressure},
          {"norm_density", c.norm_density},
          {"gravity", c.gravity}};
}

GasConstants constants_from(const json& j) {
  GasConstants c;
  c.temperature = j.at("temperature");
  c.molar_mass = j.at("molar_mass");
  c.pseudo_critical_temperature = j.at("pseudo_critical_temperature");
  c.pseudo_critical_pressure = j.at("pseudo_critical_pressure");
  c.norm_density = j.at("norm_density");
  c.gravity = j.at("gravity");
  if (!(c.temperature > 0 && c.molar_mass > 0 && c.pseudo_critical_temperature > 0 &&
        c.pseudo_critical_pressure > 0 && c.norm_density > 0 && c.gravity > 0))
    throw GasError("gas constants must be strictly positive");
  return c;
}

void check_version(const json& j) {
  const int v = j.value("format_version", -1);
  if (v != kFormatVersion)
    throw GasError("unsupported format_version " + std::to_string(v));
}

}  // namespace

json constants_to_json(const GasConstants& c) { return constants_json(c); }
GasConstants constants_from_json(const json& j) { return constants_from(j); }

json to_json(const GasNetwork& net) {
  json j;
  j["format_version"] = kFormatVersion;
  j["name"] = net.name;
  json nodes = json::array();
  for (const Node& v : net.nodes) {
    json e = {{"id", v.id}, {"boundary", v.boundary}, {"p_min", v.p_min}, {"p_max", v.p_max}};
    if (v.boundary) {
      e["entry"] = v.entry;
      e["group"] = v.group;
    }
    nodes.push_back(e);
  }
  j["nodes"] = nodes;
  json pipes = json::array();
  for (const Pipe& p : net.pipes)
    pipes.push_back({{"id", p.id},
                     {"from", net.nodes[p.from].id},
                     {"to", net.nodes[p.to].id},
                     {"length", p.length},
                     {"diameter", p.diameter},
                     {"area", p.area},
                     {"slope", p.slope},
                     {"friction", p.friction},
                     {"q_min", p.q_min},
                     {"q_max", p.q_max}});
  j["pipes"] = pipes;
  json valves = json::array();
  for (const Valve& v : net.valves)
    valves.push_back({{"id", v.id},
                      {"from", net.nodes[v.from].id},
                      {"to", net.nodes[v.to].id},
                      {"q_min", v.q_min},
                      {"q_max", v.q_max}});
  j["valves"] = valves;
  json css = json::array();
  for (const CompressorStation& c : net.compressors) {
    json cfgs = json::array();
    for (const Configuration& cfg : c.configurations) cfgs.push_back({{"id", cfg.id}, {"facets", cfg.facets}});
    css.push_back({{"id", c.id},
                   {"from", net.nodes[c.from].id},
                   {"to", net.nodes[c.to].id},
                   {"q_min", c.q_min},
                   {"q_max", c.q_max},
                   {"configurations", cfgs}});
  }
  j["compressor_stations"] = css;
  json modes = json::array();
  for (const OperationMode& o : net.modes) {
    json vs = json::object();
    for (std::size_t a = 0; a < net.valves.size(); ++a)
      vs[net.valves[a].id] = o.valve_open[a] ? "open" : "closed";
    json cs = json::object();
    for (std::size_t a = 0; a < net.compressors.size(); ++a) {
      const CsState& s = o.cs_state[a];
      cs[net.compressors[a].id] = s.kind == CsState::Kind::Bypass   ? std::string("bypass")
                                  : s.kind == CsState::Kind::Closed ? std::string("closed")
                                                                    : net.compressors[a].configurations[s.config].id;
    }
    modes.push_back({{"id", o.id}, {"valves", vs}, {"compressors", cs}});
  }
  j["operation_modes"] = modes;
  j["constants"] = constants_json(net.constants);
  j["bounds"] = {{"inflow_max", net.inflow_max}};
  return j;
}

GasNetwork network_from_json(const json& j) {
  check_version(j);
  GasNetwork net;
  net.name = j.value("name", "");
  int max_group = -1;
  for (const json& e : j.at("nodes")) {
    Node v;
    v.id = e.at("id");
    v.boundary = e.at("boundary");
    v.p_min = e.at("p_min");
    v.p_max = e.at("p_max");
    if (v.boundary) {
      v.entry = e.at("entry");
      v.group = e.at("group");
      max_group = std::max(max_group, v.group);
    }
    net.nodes.push_back(v);
  }
  net.num_groups = max_group + 1;
  for (const json& e : j.at("pipes")) {
    Pipe p;
    p.id = e.at("id");
    p.from = net.node_index(e.at("from"));
    p.to = net.node_index(e.at("to"));
    p.length = e.at("length");
    p.diameter = e.at("diameter");
    p.area = e.value("area", std::numbers::pi * p.diameter * p.diameter / 4.0);
    p.slope = e.value("slope", 0.0);
    p.friction = e.at("friction");
    p.q_min = e.at("q_min");
    p.q_max = e.at("q_max");
    net.pipes.push_back(p);
  }
  for (const json& e : j.at("valves")) {
    Valve v;
    v.id = e.at("id");
    v.from = net.node_index(e.at("from"));
    v.to = net.node_index(e.at("to"));
    v.q_min = e.at("q_min");
    v.q_max = e.at("q_max");
    net.valves.push_back(v);
  }
  for (const json& e : j.at("compressor_stations")) {
    CompressorStation c;
    c.id = e.at("id");
    c.from = net.node_index(e.at("from"));
    c.to = net.node_index(e.at("to"));
    c.q_min = e.at("q_min");
    c.q_max = e.at("q_max");
    for (const json& cfg : e.at("configurations"))
      c.configurations.push_back({cfg.at("id"), cfg.at("facets").get<std::vector<Facet>>()});
    net.compressors.push_back(c);
  }
  for (const json& e : j.at("operation_modes")) {
    OperationMode o;
    o.id = e.at("id");
    const json& vs = e.at("valves");
    for (const Valve& v : net.valves) {
      if (!vs.contains(v.id)) throw IncompleteMapping("mode " + o.id + " misses valve " + v.id);
      const std::string s = vs.at(v.id);
      if (s != "open" && s != "closed") throw GasError("bad valve state " + s);
      o.valve_open.push_back(s == "open");
    }
    const json& cs = e.at("compressors");
    for (const CompressorStation& c : net.compressors) {
      if (!cs.contains(c.id)) throw IncompleteMapping("mode " + o.id + " misses compressor " + c.id);
      const std::string s = cs.at(c.id);
      CsState st;
      if (s == "bypass") st.kind = CsState::Kind::Bypass;
      else if (s == "closed") st.kind = CsState::Kind::Closed;
      else {
        st.kind = CsState::Kind::Config;
        for (std::size_t k = 0; k < c.configurations.size(); ++k)
          if (c.configurations[k].id == s) st.config = static_cast<int>(k);
        if (st.config < 0) throw GasError("unknown configuration " + s + " in mode " + o.id);
      }
      o.cs_state.push_back(st);
    }
    net.modes.push_back(o);
  }
  net.constants = constants_from(j.at("constants"));
  net.inflow_max = j.at("bounds").at("inflow_max");
  net.validate();
  return net;
}

GasNetwork load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GasError("cannot open network file " + path);
  return network_from_json(json::parse(in));
}

void save_network(const GasNetwork& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw GasError("cannot write " + path);
  out << to_json(net).dump(2) << '\n';
}

// ---------------------------------------------------------------- templates

namespace {

Pipe make_pipe(std::string id, int from, int to, double length, double diameter, double slope,
               double q_max) {
  Pipe p;
  p.id = std::move(id);
  p.from = from;
  p.to = to;
  p.length = length;
  p.diameter = diameter;
  p.area = std::numbers::pi * diameter * diameter / 4.0;
  p.slope = slope;
  p.friction = 0.01;
  p.q_min = -q_max;
  p.q_max = q_max;
  return p;
}

/// Pressure ratio window [lo, hi] and a flow cap, as homogeneous facets.
Configuration ratio_config(std::string id, double lo, double hi, double q_cap) {
  Configuration c;
  c.id = std::move(id);
  c.facets.push_back({lo, -1.0, 0.0, 0.0});
  c.facets.push_back({-hi, 1.0, 0.0, 0.0});
  if (q_cap > 0) c.facets.push_back({0.0, 0.0, 1.0, -q_cap});
  return c;
}

CsState by() { return {CsState::Kind::Bypass, -1}; }
CsState cl() { return {CsState::Kind::Closed, -1}; }
CsState cfg(int c) { return {CsState::Kind::Config, c}; }

}  // namespace

GasNetwork toy_station() {
  GasNetwork net;
  net.name = "toy";
  net.num_groups = 3;
  net.inflow_max = 600.0;
  auto node = [&](std::string id, bool boundary, bool entry, int group) {
    net.nodes.push_back({std::move(id), boundary, entry, group, 30.0, 80.0});
    return static_cast<int>(net.nodes.size()) - 1;
  };
  const int N = node("N", true, true, 0);
  const int S = node("S", true, false, 1);
  const int W = node("W", true, false, 2);
  const int a = node("a", false, false, -1);
  const int b = node("b", false, false, -1);
  const int c = node("c", false, false, -1);
  net.pipes.push_back(make_pipe("P_Na", N, a, 20000.0, 1.0, 0.0, 1000.0));
  net.pipes.push_back(make_pipe("P_bS", b, S, 15000.0, 1.0, 0.0005, 1000.0));
  net.pipes.push_back(make_pipe("P_cW", c, W, 10000.0, 0.8, -0.0005, 1000.0));
  net.valves.push_back({"V1", a, b, -800.0, 800.0});
  net.valves.push_back({"V2", b, c, -800.0, 800.0});
  CompressorStation cs;
  cs.id = "CS";
  cs.from = a;
  cs.to = b;
  cs.q_min = -800.0;
  cs.q_max = 800.0;
  cs.configurations.push_back(ratio_config("c1", 1.0, 1.5, 0.0));
  net.compressors.push_back(cs);
  net.modes.push_back({"o0", {true, true}, {cl()}});
  net.modes.push_back({"o1", {false, true}, {cfg(0)}});
  net.modes.push_back({"o2", {true, false}, {cl()}});
  net.modes.push_back({"o3", {false, true}, {by()}});
  net.validate();
  return net;
}

GasNetwork station_d_template() {
  GasNetwork net;
  net.name = "station_d";
  net.num_groups = 3;
  net.inflow_max = 900.0;
  auto node = [&](std::string id, bool boundary, bool entry, int group) {
    net.nodes.push_back({std::move(id), boundary, entry, group, 35.0, 85.0});
    return static_cast<int>(net.nodes.size()) - 1;
  };
  auto pipe = [&](std::string id, int from, int to, double length, double diameter, double slope) {
    net.pipes.push_back(make_pipe(std::move(id), from, to, length, diameter, slope, 1500.0));
  };
  auto valve = [&](std::string id, int from, int to) {
    net.valves.push_back({std::move(id), from, to, -1500.0, 1500.0});
  };

  std::vector<int> bin, bout;
  for (int g = 0; g < 3; ++g) {
    bin.push_back(node("B" + std::to_string(g) + "in", true, true, g));
    bout.push_back(node("B" + std::to_string(g) + "out", true, false, g));
  }
  // legs: boundary pair -> collector -> two line segments -> station inlet -> K
  std::vector<int> K;
  for (int g = 0; g < 3; ++g) {
    const std::string s = std::to_string(g);
    const int L = node("L" + s, false, false, -1);
    const int Ha = node("H" + s + "a", false, false, -1);
    const int Hb = node("H" + s + "b", false, false, -1);
    const int S = node("S" + s, false, false, -1);
    pipe("PB" + s + "in", bin[g], L, 2000.0, 1.0, 0.0);
    pipe("PB" + s + "out", L, bout[g], 2000.0, 1.0, 0.0);
    pipe("PL" + s + "a", L, Ha, 15000.0, 1.0, 0.0002);
    pipe("PL" + s + "b", Ha, Hb, 15000.0, 1.0, -0.0002);
    pipe("PS" + s, Hb, S, 5000.0, 1.0, 0.0);
    K.push_back(S);
  }
  std::vector<int> Kn;
  for (int g = 0; g < 3; ++g) {
    Kn.push_back(node("K" + std::to_string(g), false, false, -1));
    pipe("PK" + std::to_string(g), K[g], Kn[g], 1000.0, 1.0, 0.0);
  }
  const int HA = node("HA", false, false, -1);
  const int HB = node("HB", false, false, -1);
  const int X1i = node("X1i", false, false, -1);
  const int X1o = node("X1o", false, false, -1);
  const int X2i = node("X2i", false, false, -1);
  const int X2o = node("X2o", false, false, -1);
  const int Y0 = node("Y0", false, false, -1);
  const int Y1 = node("Y1", false, false, -1);
  const int Y2 = node("Y2", false, false, -1);
  const int Y3 = node("Y3", false, false, -1);
  pipe("PX1i", HA, X1i, 500.0, 0.8, 0.0);
  pipe("PX2i", HA, X2i, 500.0, 0.8, 0.0);
  pipe("PX1o", X1o, Y0, 500.0, 0.8, 0.0);
  pipe("PX2o", X2o, Y1, 500.0, 0.8, 0.0);
  pipe("PY0", Y0, HB, 300.0, 0.8, 0.0);
  pipe("PY23", Y2, Y3, 3000.0, 0.9, 0.0);

  for (int g = 0; g < 3; ++g) valve("VS" + std::to_string(g), Kn[g], HA);  // 0..2
  for (int g = 0; g < 3; ++g) valve("VD" + std::to_string(g), HB, Kn[g]);  // 3..5
  valve("VBY", HA, HB);      // 6
  valve("VX01", Kn[0], Kn[1]);  // 7
  valve("VY1", Y1, HB);      // 8
  valve("VY2", Kn[0], Y2);   // 9
  valve("VY3", Y3, Kn[2]);   // 10

  CompressorStation cs1{"CS1", X1i, X1o, -1500.0, 1500.0, {}};
  cs1.configurations.push_back(ratio_config("A1", 1.0, 1.3, 900.0));
  cs1.configurations.push_back(ratio_config("A2", 1.1, 1.6, 700.0));
  CompressorStation cs2{"CS2", X2i, X2o, -1500.0, 1500.0, {}};
  for (int c = 0; c < 6; ++c)
    cs2.configurations.push_back(ratio_config("B" + std::to_string(c + 1), 1.0 + 0.05 * c,
                                              1.25 + 0.1 * c, 500.0 + 100.0 * c));
  net.compressors.push_back(cs1);
  net.compressors.push_back(cs2);

  std::vector<std::pair<CsState, CsState>> combos = {{by(), cl()}, {cl(), by()}};
  for (int c = 0; c < 2; ++c) combos.push_back({cfg(c), cl()});
  for (int c = 0; c < 6; ++c) combos.push_back({cl(), cfg(c)});
  for (int c = 0; c < 6; ++c) combos.push_back({cfg(0), cfg(c)});
  for (int c = 0; c < 2; ++c) combos.push_back({cfg(1), cfg(c)});
  // 18 combinations for each of 3 source legs, plus 2 straight-through modes
  int id = 0;
  for (int source = 0; source < 3; ++source) {
    for (const auto& [s1, s2] : combos) {
      OperationMode o;
      o.id = "o" + std::to_string(id++);
      o.valve_open.assign(net.valves.size(), false);
      o.valve_open[source] = true;
      for (int g = 0; g < 3; ++g)
        if (g != source) o.valve_open[3 + g] = true;
      o.valve_open[8] = s2.kind != CsState::Kind::Closed;
      o.cs_state = {s1, s2};
      net.modes.push_back(o);
    }
  }
  for (int variant = 0; variant < 2; ++variant) {
    OperationMode o;
    o.id = "o" + std::to_string(id++);
    o.valve_open.assign(net.valves.size(), false);
    o.valve_open[7] = o.valve_open[9] = o.valve_open[10] = true;
    o.valve_open[6] = variant == 1;
    o.cs_state = {cl(), cl()};
    net.modes.push_back(o);
  }
  net.validate();
  return net;
}

GasNetwork network_template(const std::string& name) {
  if (name == "toy") return toy_station();
  if (name == "station_d") return station_d_template();
  throw GasError("unknown network template: " + name);
}

}  // namespace gaswarm::gas

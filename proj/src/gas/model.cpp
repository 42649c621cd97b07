#include "gaswarm/gas/model.hpp"

#include <cmath>

#include "gaswarm/log.hpp"

namespace gaswarm::gas {

using milp::Block;
using milp::kInf;
using milp::Row;
using milp::Sense;

void ObjectiveWeights::validate() const {
  const double w[] = {pressure_slack, flow_slack, mode_change, operating_point_change};
  bool any = false;
  for (double x : w) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw GasError("objective weights must be finite and >= 0");
    any = any || x > 0.0;
  }
  if (!any) throw GasError("at least one objective weight must be positive");
}

namespace ids {

namespace {
std::string at(const std::string& head, const std::string& a, int t) {
  return head + "[" + a + "," + std::to_string(t) + "]";
}
std::string at(const std::string& head, const std::string& a, const std::string& b, int t) {
  return head + "[" + a + "," + b + "," + std::to_string(t) + "]";
}
}  // namespace

std::string pressure(const GasNetwork& n, int node, int t) { return at("p", n.nodes[node].id, t); }
std::string inflow(const GasNetwork& n, int node, int t) { return at("d", n.nodes[node].id, t); }
std::string pipe_in(const GasNetwork& n, int pipe, int t) { return at("qin", n.pipes[pipe].id, t); }
std::string pipe_out(const GasNetwork& n, int pipe, int t) { return at("qout", n.pipes[pipe].id, t); }
std::string valve_flow(const GasNetwork& n, int valve, int t) { return at("q", n.valves[valve].id, t); }
std::string cs_flow(const GasNetwork& n, int cs, int t) { return at("q", n.compressors[cs].id, t); }
std::string slack(const char* kind, const GasNetwork& n, int node, int t) {
  return at(kind, n.nodes[node].id, t);
}
std::string mode(const GasNetwork& n, int mode, int t) { return at("m", n.modes[mode].id, t); }
std::string valve_open(const GasNetwork& n, int valve, int t) {
  return at("mop", n.valves[valve].id, t);
}
std::string cs_bypass(const GasNetwork& n, int cs, int t) { return at("mby", n.compressors[cs].id, t); }
std::string cs_closed(const GasNetwork& n, int cs, int t) { return at("mcl", n.compressors[cs].id, t); }
std::string cs_config(const GasNetwork& n, int cs, int config, int t) {
  return at("mcfg", n.compressors[cs].id, n.compressors[cs].configurations[config].id, t);
}
std::string direction(int group, int t) { return at("dir", "g" + std::to_string(group), t); }
std::string copy(const char* kind, const GasNetwork& n, int cs, const std::string& state, int t) {
  return at(kind, n.compressors[cs].id, state, t);
}
std::string mode_change(const GasNetwork& n, int mode, int t) { return at("dm", n.modes[mode].id, t); }
std::string op_change(const GasNetwork& n, int cs, int config, int t) {
  return at("dqc", n.compressors[cs].id, n.compressors[cs].configurations[config].id, t);
}

}  // namespace ids

double pipe_compressibility(const Pipe& pipe, const NetworkState& initial,
                            const GasConstants& constants) {
  const double mean = 0.5 * (initial.pressure.at(pipe.from) + initial.pressure.at(pipe.to));
  return constants.compressibility(mean);
}

std::pair<double, double> compute_pipe_velocities(const GasNetwork& net, int pipe,
                                                  const NetworkState& initial,
                                                  const GasConstants& constants) {
  const Pipe& p = net.pipes.at(pipe);
  const double pu = initial.pressure.at(p.from);
  const double pv = initial.pressure.at(p.to);
  if (!(pu > 0.0) || !(pv > 0.0))
    throw NonpositivePressure("nonpositive initial pressure at pipe " + p.id);
  const double rtz = constants.specific_gas_constant() * constants.temperature *
                     pipe_compressibility(p, initial, constants);
  const double kg = constants.kg_per_s_per_flow_unit();
  auto velocity = [&](double q, double pressure) {
    return std::max(kVelocityFloor, std::abs(q) * kg * rtz / (pressure * kPascalPerBar * p.area));
  };
  return {velocity(initial.pipe_in.at(pipe), pu), velocity(initial.pipe_out.at(pipe), pv)};
}

PipeCoefficients pipe_coefficients(const Pipe& pipe, double rs_t_z, double gravity,
                                   double dt_diff, double v_in, double v_out, double kg_per_unit,
                                   double pa_per_unit) {
  PipeCoefficients c;
  c.continuity_flow =
      2.0 * rs_t_z * dt_diff / (pipe.length * pipe.area) * kg_per_unit / pa_per_unit;
  c.gravity = gravity * pipe.slope * pipe.length / (2.0 * rs_t_z);
  const double friction = pipe.friction * pipe.length / (4.0 * pipe.diameter * pipe.area);
  c.friction_in = friction * v_in * kg_per_unit / pa_per_unit;
  c.friction_out = friction * v_out * kg_per_unit / pa_per_unit;
  return c;
}

// ---------------------------------------------------------------- builder

namespace {

const std::string kBypass = "by";
const std::string kClosed = "cl";

}  // namespace

ModelBuilder::ModelBuilder(const GasNetwork& net, const Instance& inst, ObjectiveWeights weights)
    : net_(net), inst_(inst), weights_(weights) {
  weights_.validate();
  validate_instance(net_, inst_);
  const GasConstants& c = inst_.constants;
  for (std::size_t a = 0; a < net_.pipes.size(); ++a) {
    const Pipe& pipe = net_.pipes[a];
    const double z = pipe_compressibility(pipe, inst_.initial_state, c);
    if (!(z > 0.0)) throw GasError("nonpositive compressibility in pipe " + pipe.id);
    rs_t_z_.push_back(c.specific_gas_constant() * c.temperature * z);
    velocity_.push_back(compute_pipe_velocities(net_, static_cast<int>(a), inst_.initial_state, c));
  }
}

void ModelBuilder::add(Lin& lin, const std::string& id, double coef) const {
  lin.terms.push_back({model_.index(id), coef});
}

Row ModelBuilder::make_row(std::string name, Lin lin, Sense sense, double rhs) const {
  return Row{std::move(name), std::move(lin.terms), sense, rhs - lin.constant};
}

double ModelBuilder::initial_pressure(int node) const { return inst_.initial_state.pressure[node]; }

double ModelBuilder::initial_copy_flow(int cs, int config) const {
  const CsState& s = net_.modes[inst_.initial_state.mode].cs_state[cs];
  if (s.kind == CsState::Kind::Config && s.config == config) return inst_.initial_state.cs_flow[cs];
  return 0.0;
}

double ModelBuilder::cs_bound_flow(int cs) const { return std::max(net_.compressors[cs].q_max, 0.0); }

void ModelBuilder::declare_variables() {
  if (declared_) return;
  declared_ = true;
  for (int t = 1; t <= inst_.horizon; ++t) {
    for (std::size_t v = 0; v < net_.nodes.size(); ++v) {
      const int i = static_cast<int>(v);
      const Node& n = net_.nodes[v];
      model_.add_variable(ids::pressure(net_, i, t), n.p_min, n.p_max, Block::Continuous);
      if (!n.boundary) continue;
      model_.add_variable(ids::inflow(net_, i, t), -net_.inflow_max, net_.inflow_max,
                          Block::Continuous);
      for (const char* k : {"sp+", "sp-", "sq+", "sq-"})
        model_.add_variable(ids::slack(k, net_, i, t), 0.0, kInf, Block::Slack);
    }
    for (std::size_t a = 0; a < net_.pipes.size(); ++a) {
      const Pipe& p = net_.pipes[a];
      model_.add_variable(ids::pipe_in(net_, static_cast<int>(a), t), p.q_min, p.q_max,
                          Block::Continuous);
      model_.add_variable(ids::pipe_out(net_, static_cast<int>(a), t), p.q_min, p.q_max,
                          Block::Continuous);
    }
    for (std::size_t a = 0; a < net_.valves.size(); ++a) {
      const Valve& va = net_.valves[a];
      model_.add_variable(ids::valve_flow(net_, static_cast<int>(a), t), std::min(va.q_min, 0.0),
                          std::max(va.q_max, 0.0), Block::Continuous);
      model_.add_variable(ids::valve_open(net_, static_cast<int>(a), t), 0, 1, Block::Auxiliary);
    }
    for (std::size_t a = 0; a < net_.compressors.size(); ++a) {
      const int i = static_cast<int>(a);
      const CompressorStation& cs = net_.compressors[a];
      model_.add_variable(ids::cs_flow(net_, i, t), std::min(cs.q_min, 0.0),
                          std::max(cs.q_max, 0.0), Block::Continuous);
      model_.add_variable(ids::cs_bypass(net_, i, t), 0, 1, Block::Auxiliary);
      model_.add_variable(ids::cs_closed(net_, i, t), 0, 1, Block::Auxiliary);
      for (std::size_t c = 0; c < cs.configurations.size(); ++c)
        model_.add_variable(ids::cs_config(net_, i, static_cast<int>(c), t), 0, 1, Block::Auxiliary);
      const double pu = net_.nodes[cs.from].p_max, pv = net_.nodes[cs.to].p_max;
      auto copies = [&](const std::string& state, double qlo, double qhi) {
        model_.add_variable(ids::copy("pu", net_, i, state, t), 0.0, pu, Block::Continuous);
        model_.add_variable(ids::copy("pv", net_, i, state, t), 0.0, pv, Block::Continuous);
        model_.add_variable(ids::copy("qc", net_, i, state, t), qlo, qhi, Block::Continuous);
      };
      copies(kBypass, std::min(cs.q_min, 0.0), std::max(cs.q_max, 0.0));
      copies(kClosed, 0.0, 0.0);
      for (std::size_t c = 0; c < cs.configurations.size(); ++c) {
        copies(cs.configurations[c].id, 0.0, cs_bound_flow(i));
        model_.add_variable(ids::op_change(net_, i, static_cast<int>(c), t), 0.0, kInf,
                            Block::Continuous);
      }
    }
    for (std::size_t o = 0; o < net_.modes.size(); ++o) {
      model_.add_variable(ids::mode(net_, static_cast<int>(o), t), 0, 1, Block::Decision);
      model_.add_variable(ids::mode_change(net_, static_cast<int>(o), t), 0, 1, Block::Continuous);
    }
    for (int g = 0; g < net_.num_groups; ++g)
      model_.add_variable(ids::direction(g, t), 0, 1, Block::Auxiliary);
  }
}

std::vector<Row> ModelBuilder::assemble_pipe_rows(int pipe, int t1, int t2) const {
  const Pipe& p = net_.pipes.at(pipe);
  const GasConstants& c = inst_.constants;
  const PipeCoefficients k = pipe_coefficients(
      p, rs_t_z_[pipe], c.gravity, (t2 - t1) * inst_.granularity_s, velocity_[pipe].first,
      velocity_[pipe].second, c.kg_per_s_per_flow_unit(), kPascalPerBar);
  const std::string tag = "[" + p.id + "," + std::to_string(t2) + "]";

  Lin cont;
  add(cont, ids::pressure(net_, p.from, t2), 1.0);
  add(cont, ids::pressure(net_, p.to, t2), 1.0);
  for (int node : {p.from, p.to}) {
    if (t1 == 0) cont.constant -= initial_pressure(node);
    else add(cont, ids::pressure(net_, node, t1), -1.0);
  }
  if (k.continuity_flow != 0.0) {
    add(cont, ids::pipe_out(net_, pipe, t2), k.continuity_flow);
    add(cont, ids::pipe_in(net_, pipe, t2), -k.continuity_flow);
  }

  Lin mom;
  add(mom, ids::pressure(net_, p.from, t2), -1.0 + k.gravity);
  add(mom, ids::pressure(net_, p.to, t2), 1.0 + k.gravity);
  add(mom, ids::pipe_in(net_, pipe, t2), k.friction_in);
  add(mom, ids::pipe_out(net_, pipe, t2), k.friction_out);

  return {make_row("continuity" + tag, std::move(cont), Sense::Equal, 0.0),
          make_row("momentum" + tag, std::move(mom), Sense::Equal, 0.0)};
}

Row ModelBuilder::assemble_node_balance(int node, int t) const {
  Lin lin;
  for (std::size_t a = 0; a < net_.pipes.size(); ++a) {
    const Pipe& p = net_.pipes[a];
    if (p.to == node) add(lin, ids::pipe_out(net_, static_cast<int>(a), t), 1.0);
    if (p.from == node) add(lin, ids::pipe_in(net_, static_cast<int>(a), t), -1.0);
  }
  for (std::size_t a = 0; a < net_.valves.size(); ++a) {
    const Valve& v = net_.valves[a];
    if (v.to == node) add(lin, ids::valve_flow(net_, static_cast<int>(a), t), 1.0);
    if (v.from == node) add(lin, ids::valve_flow(net_, static_cast<int>(a), t), -1.0);
  }
  for (std::size_t a = 0; a < net_.compressors.size(); ++a) {
    const CompressorStation& c = net_.compressors[a];
    if (c.to == node) add(lin, ids::cs_flow(net_, static_cast<int>(a), t), 1.0);
    if (c.from == node) add(lin, ids::cs_flow(net_, static_cast<int>(a), t), -1.0);
  }
  if (net_.nodes.at(node).boundary) add(lin, ids::inflow(net_, node, t), 1.0);
  return make_row("balance[" + net_.nodes[node].id + "," + std::to_string(t) + "]", std::move(lin),
                  Sense::Equal, 0.0);
}

std::vector<Row> ModelBuilder::assemble_compressor_block(int cs, int t) const {
  const CompressorStation& c = net_.compressors.at(cs);
  const Node& u = net_.nodes[c.from];
  const Node& v = net_.nodes[c.to];
  const std::string tag = "[" + c.id + "," + std::to_string(t) + "]";
  std::vector<Row> rows;

  struct StateRef {
    std::string name;
    std::string indicator;
  };
  std::vector<StateRef> states = {{kBypass, ids::cs_bypass(net_, cs, t)},
                                  {kClosed, ids::cs_closed(net_, cs, t)}};
  for (std::size_t k = 0; k < c.configurations.size(); ++k)
    states.push_back({c.configurations[k].id, ids::cs_config(net_, cs, static_cast<int>(k), t)});

  Lin choice;
  for (const StateRef& s : states) add(choice, s.indicator, 1.0);
  rows.push_back(make_row("cs_choice" + tag, std::move(choice), Sense::Equal, 1.0));

  for (std::size_t k = 0; k < c.configurations.size(); ++k) {
    const StateRef& s = states[2 + k];
    const auto& facets = c.configurations[k].facets;
    for (std::size_t f = 0; f < facets.size(); ++f) {
      Lin lin;
      const Facet& a = facets[f];
      if (a[0] != 0.0) add(lin, ids::copy("pu", net_, cs, s.name, t), a[0]);
      if (a[1] != 0.0) add(lin, ids::copy("pv", net_, cs, s.name, t), a[1]);
      if (a[2] != 0.0) add(lin, ids::copy("qc", net_, cs, s.name, t), a[2]);
      if (a[3] != 0.0) add(lin, s.indicator, a[3]);
      rows.push_back(make_row("cs_facet[" + c.id + "," + s.name + "," + std::to_string(f) + "," +
                                  std::to_string(t) + "]",
                              std::move(lin), Sense::LessEqual, 0.0));
    }
  }

  const std::pair<const char*, std::string> aggregates[] = {
      {"pu", ids::pressure(net_, c.from, t)},
      {"pv", ids::pressure(net_, c.to, t)},
      {"qc", ids::cs_flow(net_, cs, t)}};
  for (const auto& [kind, aggregate] : aggregates) {
    Lin lin;
    add(lin, aggregate, 1.0);
    for (const StateRef& s : states) add(lin, ids::copy(kind, net_, cs, s.name, t), -1.0);
    rows.push_back(make_row(std::string("cs_sum_") + kind + tag, std::move(lin), Sense::Equal, 0.0));
  }

  for (std::size_t i = 0; i < states.size(); ++i) {
    const StateRef& s = states[i];
    const std::string st = "[" + c.id + "," + s.name + "," + std::to_string(t) + "]";
    auto scaled = [&](const char* kind, const char* label, double bound, Sense sense) {
      Lin lin;
      add(lin, ids::copy(kind, net_, cs, s.name, t), 1.0);
      add(lin, s.indicator, -bound);
      rows.push_back(make_row(std::string("cs_") + label + st, std::move(lin), sense, 0.0));
    };
    scaled("pu", "pu_hi", u.p_max, Sense::LessEqual);
    scaled("pu", "pu_lo", u.p_min, Sense::GreaterEqual);
    scaled("pv", "pv_hi", v.p_max, Sense::LessEqual);
    scaled("pv", "pv_lo", v.p_min, Sense::GreaterEqual);
    if (i == 0) {
      scaled("qc", "q_hi", c.q_max, Sense::LessEqual);
      scaled("qc", "q_lo", c.q_min, Sense::GreaterEqual);
    } else if (i >= 2) {
      scaled("qc", "q_hi", cs_bound_flow(cs), Sense::LessEqual);
    }
  }

  Lin bypass;
  add(bypass, ids::copy("pu", net_, cs, kBypass, t), 1.0);
  add(bypass, ids::copy("pv", net_, cs, kBypass, t), -1.0);
  rows.push_back(make_row("cs_bypass" + tag, std::move(bypass), Sense::Equal, 0.0));
  return rows;
}

std::vector<Row> ModelBuilder::assemble_valve_block(int valve, int t) const {
  const Valve& va = net_.valves.at(valve);
  const Node& u = net_.nodes[va.from];
  const Node& v = net_.nodes[va.to];
  for (double b : {u.p_min, u.p_max, v.p_min, v.p_max, va.q_min, va.q_max})
    if (!std::isfinite(b)) throw UnboundedBigM("valve " + va.id + " needs finite bounds");
  const std::string tag = "[" + va.id + "," + std::to_string(t) + "]";
  const std::string pu = ids::pressure(net_, va.from, t);
  const std::string pv = ids::pressure(net_, va.to, t);
  const std::string m = ids::valve_open(net_, valve, t);
  const std::string q = ids::valve_flow(net_, valve, t);
  std::vector<Row> rows;

  const double upper_gap = u.p_max - v.p_min;
  Lin r1;
  add(r1, pu, 1.0);
  add(r1, pv, -1.0);
  add(r1, m, upper_gap);
  rows.push_back(make_row("valve_dp_hi" + tag, std::move(r1), Sense::LessEqual, upper_gap));

  const double lower_gap = u.p_min - v.p_max;
  Lin r2;
  add(r2, pu, 1.0);
  add(r2, pv, -1.0);
  add(r2, m, lower_gap);
  rows.push_back(make_row("valve_dp_lo" + tag, std::move(r2), Sense::GreaterEqual, lower_gap));

  Lin r3;
  add(r3, q, 1.0);
  add(r3, m, -va.q_max);
  rows.push_back(make_row("valve_q_hi" + tag, std::move(r3), Sense::LessEqual, 0.0));

  Lin r4;
  add(r4, q, 1.0);
  add(r4, m, -va.q_min);
  rows.push_back(make_row("valve_q_lo" + tag, std::move(r4), Sense::GreaterEqual, 0.0));
  return rows;
}

std::vector<Row> ModelBuilder::assemble_mode_coupling(int t) const {
  const std::string ts = std::to_string(t);
  std::vector<Row> rows;
  Lin choice;
  for (std::size_t o = 0; o < net_.modes.size(); ++o)
    add(choice, ids::mode(net_, static_cast<int>(o), t), 1.0);
  rows.push_back(make_row("mode_choice[" + ts + "]", std::move(choice), Sense::Equal, 1.0));

  for (std::size_t a = 0; a < net_.valves.size(); ++a) {
    Lin lin;
    add(lin, ids::valve_open(net_, static_cast<int>(a), t), 1.0);
    for (std::size_t o = 0; o < net_.modes.size(); ++o)
      if (net_.modes[o].valve_open[a]) add(lin, ids::mode(net_, static_cast<int>(o), t), -1.0);
    rows.push_back(make_row("couple_valve[" + net_.valves[a].id + "," + ts + "]", std::move(lin),
                            Sense::Equal, 0.0));
  }
  for (std::size_t a = 0; a < net_.compressors.size(); ++a) {
    const int cs = static_cast<int>(a);
    const CompressorStation& c = net_.compressors[a];
    auto couple = [&](const std::string& indicator, const std::string& label, const CsState& want) {
      Lin lin;
      add(lin, indicator, 1.0);
      for (std::size_t o = 0; o < net_.modes.size(); ++o)
        if (net_.modes[o].cs_state[a] == want) add(lin, ids::mode(net_, static_cast<int>(o), t), -1.0);
      rows.push_back(make_row("couple_" + label + "[" + c.id + "," + ts + "]", std::move(lin),
                              Sense::Equal, 0.0));
    };
    couple(ids::cs_bypass(net_, cs, t), "by", CsState{CsState::Kind::Bypass, -1});
    couple(ids::cs_closed(net_, cs, t), "cl", CsState{CsState::Kind::Closed, -1});
    for (std::size_t k = 0; k < c.configurations.size(); ++k)
      couple(ids::cs_config(net_, cs, static_cast<int>(k), t), c.configurations[k].id,
             CsState{CsState::Kind::Config, static_cast<int>(k)});
  }
  return rows;
}

std::vector<Row> ModelBuilder::assemble_direction_rows(int t) const {
  std::vector<Row> rows;
  for (int g = 0; g < net_.num_groups; ++g) {
    const std::vector<int> members = net_.group_members(g);
    const double big = net_.inflow_max * static_cast<double>(members.size());
    const std::string tag = "[g" + std::to_string(g) + "," + std::to_string(t) + "]";
    Lin up, down;
    for (int v : members) {
      add(up, ids::inflow(net_, v, t), 1.0);
      add(down, ids::inflow(net_, v, t), 1.0);
    }
    add(up, ids::direction(g, t), -big);
    add(down, ids::direction(g, t), -big);
    rows.push_back(make_row("dir_hi" + tag, std::move(up), Sense::LessEqual, 0.0));
    rows.push_back(make_row("dir_lo" + tag, std::move(down), Sense::GreaterEqual, -big));
  }
  return rows;
}

std::vector<Row> ModelBuilder::assemble_slack_rows(int t) const {
  std::vector<Row> rows;
  for (int v : net_.boundary_nodes()) {
    const std::string tag = "[" + net_.nodes[v].id + "," + std::to_string(t) + "]";
    Lin lp;
    add(lp, ids::pressure(net_, v, t), 1.0);
    add(lp, ids::slack("sp+", net_, v, t), -1.0);
    add(lp, ids::slack("sp-", net_, v, t), 1.0);
    rows.push_back(make_row("slack_p" + tag, std::move(lp), Sense::Equal,
                            inst_.pressure_forecast[v][t - 1]));
    Lin lq;
    add(lq, ids::inflow(net_, v, t), 1.0);
    add(lq, ids::slack("sq+", net_, v, t), -1.0);
    add(lq, ids::slack("sq-", net_, v, t), 1.0);
    rows.push_back(make_row("slack_q" + tag, std::move(lq), Sense::Equal,
                            inst_.flow_forecast[v][t - 1]));
  }
  return rows;
}

std::vector<Row> ModelBuilder::assemble_change_rows(int t) const {
  std::vector<Row> rows;
  const std::string ts = std::to_string(t);
  // |x_t - x_{t-1}| <= y as two rows; at t = 1 the previous value is a constant
  auto abs_rows = [&](const std::string& label, const std::string& y, const std::string& now,
                      const std::optional<std::string>& prev, double prev_value) {
    Lin a, b;
    add(a, y, 1.0);
    add(a, now, -1.0);
    add(b, y, 1.0);
    add(b, now, 1.0);
    if (prev) {
      add(a, *prev, 1.0);
      add(b, *prev, -1.0);
    } else {
      a.constant += prev_value;
      b.constant -= prev_value;
    }
    rows.push_back(make_row(label + "_up", std::move(a), Sense::GreaterEqual, 0.0));
    rows.push_back(make_row(label + "_down", std::move(b), Sense::GreaterEqual, 0.0));
  };
  for (std::size_t o = 0; o < net_.modes.size(); ++o) {
    const int i = static_cast<int>(o);
    std::optional<std::string> prev;
    if (t > 1) prev = ids::mode(net_, i, t - 1);
    abs_rows("mode_change[" + net_.modes[o].id + "," + ts + "]", ids::mode_change(net_, i, t),
             ids::mode(net_, i, t), prev, inst_.initial_state.mode == i ? 1.0 : 0.0);
  }
  for (std::size_t a = 0; a < net_.compressors.size(); ++a) {
    const int cs = static_cast<int>(a);
    const CompressorStation& c = net_.compressors[a];
    for (std::size_t k = 0; k < c.configurations.size(); ++k) {
      const int ci = static_cast<int>(k);
      const std::string& name = c.configurations[k].id;
      std::optional<std::string> prev;
      if (t > 1) prev = ids::copy("qc", net_, cs, name, t - 1);
      abs_rows("op_change[" + c.id + "," + name + "," + ts + "]", ids::op_change(net_, cs, ci, t),
               ids::copy("qc", net_, cs, name, t), prev, initial_copy_flow(cs, ci));
    }
  }
  return rows;
}

std::vector<double> ModelBuilder::objective_vector() const {
  std::vector<double> c(model_.num_variables(), 0.0);
  for (int t = 1; t <= inst_.horizon; ++t) {
    for (int v : net_.boundary_nodes()) {
      c[model_.index(ids::slack("sp+", net_, v, t))] = weights_.pressure_slack;
      c[model_.index(ids::slack("sp-", net_, v, t))] = weights_.pressure_slack;
      c[model_.index(ids::slack("sq+", net_, v, t))] = weights_.flow_slack;
      c[model_.index(ids::slack("sq-", net_, v, t))] = weights_.flow_slack;
    }
    for (std::size_t o = 0; o < net_.modes.size(); ++o)
      c[model_.index(ids::mode_change(net_, static_cast<int>(o), t))] = weights_.mode_change;
    for (std::size_t a = 0; a < net_.compressors.size(); ++a)
      for (std::size_t k = 0; k < net_.compressors[a].configurations.size(); ++k)
        c[model_.index(ids::op_change(net_, static_cast<int>(a), static_cast<int>(k), t))] =
            weights_.operating_point_change;
  }
  return c;
}

namespace {

void warn_unreachable_states(const GasNetwork& net) {
  for (std::size_t a = 0; a < net.valves.size(); ++a) {
    bool open = false, closed = false;
    for (const OperationMode& o : net.modes) (o.valve_open[a] ? open : closed) = true;
    if (!open || !closed)
      log::warning("valve " + net.valves[a].id + " is " + (open ? "open" : "closed") +
                   " in every operation mode");
  }
  for (std::size_t a = 0; a < net.compressors.size(); ++a) {
    const CompressorStation& c = net.compressors[a];
    for (std::size_t k = 0; k < c.configurations.size(); ++k) {
      bool used = false;
      for (const OperationMode& o : net.modes)
        used = used || o.cs_state[a] == CsState{CsState::Kind::Config, static_cast<int>(k)};
      if (!used)
        log::warning("configuration " + c.configurations[k].id + " of " + c.id +
                     " is not used by any operation mode");
    }
  }
}

}  // namespace

milp::ParametricMilp ModelBuilder::build() {
  declare_variables();
  warn_unreachable_states(net_);
  auto take = [&](std::vector<Row> rows) {
    for (Row& r : rows) model_.add_row(std::move(r.name), std::move(r.terms), r.sense, r.rhs);
  };
  for (int t = 1; t <= inst_.horizon; ++t) {
    for (std::size_t a = 0; a < net_.pipes.size(); ++a)
      take(assemble_pipe_rows(static_cast<int>(a), t - 1, t));
    for (std::size_t v = 0; v < net_.nodes.size(); ++v)
      take({assemble_node_balance(static_cast<int>(v), t)});
    for (std::size_t a = 0; a < net_.compressors.size(); ++a)
      take(assemble_compressor_block(static_cast<int>(a), t));
    for (std::size_t a = 0; a < net_.valves.size(); ++a)
      take(assemble_valve_block(static_cast<int>(a), t));
    take(assemble_mode_coupling(t));
    take(assemble_slack_rows(t));
    take(assemble_direction_rows(t));
    take(assemble_change_rows(t));
  }
  const std::vector<double> c = objective_vector();
  for (std::size_t j = 0; j < c.size(); ++j) model_.set_objective(static_cast<int>(j), c[j]);
  model_.check_invariants();
  return model_;
}

milp::ParametricMilp build_instance_milp(const GasNetwork& net, const Instance& inst,
                                         const ObjectiveWeights& weights,
                                         const std::optional<ModeSequence>& z1_fix) {
  ModelBuilder builder(net, inst, weights);
  milp::ParametricMilp model = builder.build();
  if (!z1_fix) return model;
  return milp::fix_binaries(model, mode_assignment(net, *z1_fix));
}

std::map<std::string, int> mode_assignment(const GasNetwork& net, const ModeSequence& seq) {
  std::map<std::string, int> out;
  for (std::size_t t = 1; t <= seq.size(); ++t) {
    const int chosen = seq[t - 1];
    if (chosen < 0 || chosen >= static_cast<int>(net.modes.size()))
      throw GasError("mode sequence names an unknown operation mode");
    for (std::size_t o = 0; o < net.modes.size(); ++o)
      out[ids::mode(net, static_cast<int>(o), static_cast<int>(t))] =
          static_cast<int>(o) == chosen ? 1 : 0;
  }
  return out;
}

ModeSequence extract_modes(const GasNetwork& net, const milp::ParametricMilp& model,
                           const std::vector<double>& point, int horizon) {
  ModeSequence seq;
  for (int t = 1; t <= horizon; ++t) {
    int best = 0;
    double best_value = -1.0;
    for (std::size_t o = 0; o < net.modes.size(); ++o) {
      const double v = point.at(model.index(ids::mode(net, static_cast<int>(o), t)));
      if (v > best_value) {
        best_value = v;
        best = static_cast<int>(o);
      }
    }
    seq.push_back(best);
  }
  return seq;
}

NetworkState extract_state(const GasNetwork& net, const milp::ParametricMilp& model,
                           const std::vector<double>& point, int t) {
  auto val = [&](const std::string& id) { return point.at(model.index(id)); };
  NetworkState s;
  s.mode = extract_modes(net, model, point, t).back();
  for (std::size_t v = 0; v < net.nodes.size(); ++v) {
    const int i = static_cast<int>(v);
    s.pressure.push_back(val(ids::pressure(net, i, t)));
    s.inflow.push_back(net.nodes[v].boundary ? val(ids::inflow(net, i, t)) : 0.0);
  }
  for (std::size_t a = 0; a < net.pipes.size(); ++a) {
    s.pipe_in.push_back(val(ids::pipe_in(net, static_cast<int>(a), t)));
    s.pipe_out.push_back(val(ids::pipe_out(net, static_cast<int>(a), t)));
  }
  for (std::size_t a = 0; a < net.valves.size(); ++a)
    s.valve_flow.push_back(val(ids::valve_flow(net, static_cast<int>(a), t)));
  for (std::size_t a = 0; a < net.compressors.size(); ++a)
    s.cs_flow.push_back(val(ids::cs_flow(net, static_cast<int>(a), t)));
  return s;
}

}  // namespace gaswarm::gas

#pragma once

#include <vector>

#include <nlohmann/json.hpp>

#include "gaswarm/gas/instance.hpp"
#include "gaswarm/nn/tensor.hpp"

namespace gaswarm::nn {

/// Fixed layout of the network input streams for one gas network.
///   flow      (batch, boundary nodes, k): forecast inflow / flow_scale
///   pressure  (batch, boundary nodes, k): (forecast - pressure_mid) / pressure_half
///   state     (batch, state_width, k): the initial state broadcast over time:
///             node pressures (scaled like the pressure stream), boundary
///             inflows, pipe in-flows, pipe out-flows, valve flows, compressor
///             flows (all / flow_scale), one-hot mode, then the five sampled
///             gas constants centred and scaled as listed in constant_refs.
///   modes     (batch, |modes|, k): one-hot or probability mode sequence
/// Boundary nodes appear in network order.
struct EncodingLayout {
  int boundary = 0;
  int nodes = 0;
  int pipes = 0;
  int valves = 0;
  int compressors = 0;
  int modes = 0;
  double flow_scale = 1.0;
  double pressure_mid = 0.0;
  double pressure_half = 1.0;

  [[nodiscard]] int state_width() const {
    return nodes + boundary + 2 * pipes + valves + compressors + modes + 5;
  }
  [[nodiscard]] nlohmann::json to_json() const;
  [[nodiscard]] static EncodingLayout from_json(const nlohmann::json& j);
  friend bool operator==(const EncodingLayout&, const EncodingLayout&) = default;
};

/// (centre, scale) pairs for temperature, norm density, molar mass,
/// pseudo-critical temperature and pressure.
inline constexpr double kConstantRefs[5][2] = {
    {288.15, 10.0}, {0.8, 0.05}, {0.0185, 0.001}, {195.0, 5.0}, {46.0, 1.0}};

[[nodiscard]] EncodingLayout make_layout(const gas::GasNetwork& net);

struct EncodedBatch {
  Tensor flow;
  Tensor pressure;
  Tensor state;

  [[nodiscard]] int batch() const { return flow.dim(0); }
  [[nodiscard]] int steps() const { return flow.dim(2); }
};

/// All instances must share the horizon. Throws ShapeMismatch otherwise.
[[nodiscard]] EncodedBatch encode(const gas::GasNetwork& net, const EncodingLayout& layout,
                                  const std::vector<const gas::Instance*>& batch);

/// One-hot (batch, modes, k) tensor of mode sequences.
[[nodiscard]] Tensor encode_modes(const std::vector<const gas::ModeSequence*>& seqs, int modes);

}  // namespace gaswarm::nn

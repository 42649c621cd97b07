#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaswarm/nn/encoding.hpp"
#include "gaswarm/nn/layers.hpp"

namespace gaswarm::nn {

struct ArchConfig {
  int channels = 16;
  int generator_blocks = 3;
  int discriminator_blocks = 3;
  std::vector<int> branch_kernels{1, 3, 5};
  int branch_width = 8;
  int stem_kernel = 3;
  int merge_kernel = 3;
  double beta = 1.0;  // softplus parameter of the discriminator head

  void validate() const;
  [[nodiscard]] nlohmann::json to_json() const;
  [[nodiscard]] static ArchConfig from_json(const nlohmann::json& j);
};

/// 64-bit FNV-1a.
[[nodiscard]] std::uint64_t fnv1a(std::string_view bytes);

/// Shared input section: one stem per stream, flow and pressure merged, the
/// result merged with the initial-state stream.
class PiTrunk {
 public:
  PiTrunk(ParameterStore& store, const std::string& name, const EncodingLayout& layout,
          const ArchConfig& arch, data::RandomSource& rng);
  [[nodiscard]] Tensor forward(const EncodedBatch& x, Tape* tape) const;
  void backward(const Tensor& dy, Tape& tape) const;

 private:
  Conv1dLayer flow_, pressure_, state_;
  MergeLayer merge_fp_, merge_state_;
};

class GeneratorNet {
 public:
  GeneratorNet(const EncodingLayout& layout, const ArchConfig& arch, std::uint64_t seed);

  /// (batch, modes, k) probabilities at the current temperature.
  [[nodiscard]] Tensor forward(const EncodedBatch& x, Tape* tape = nullptr) const;
  /// Accumulates parameter gradients from d loss / d probabilities.
  void backward(const Tensor& dprobs, Tape& tape);

  [[nodiscard]] double temperature() const { return temperature_; }
  void set_temperature(double t) { temperature_ = t; }
  [[nodiscard]] ParameterStore& params() { return params_; }
  [[nodiscard]] const ParameterStore& params() const { return params_; }
  [[nodiscard]] const EncodingLayout& layout() const { return layout_; }
  [[nodiscard]] const ArchConfig& arch() const { return arch_; }
  [[nodiscard]] std::uint64_t architecture_hash() const;

 private:
  EncodingLayout layout_;
  ArchConfig arch_;
  double temperature_ = 1.0;
  ParameterStore params_;
  std::unique_ptr<PiTrunk> trunk_;
  std::vector<InceptionBlock> blocks_;
  std::unique_ptr<GeneratorHead> head_;
};

class DiscriminatorNet {
 public:
  DiscriminatorNet(const EncodingLayout& layout, const ArchConfig& arch, std::uint64_t seed);

  /// Predicted scaled objective per batch element, shape (batch), >= 0.
  [[nodiscard]] Tensor forward(const Tensor& modes, const EncodedBatch& x,
                               Tape* tape = nullptr) const;
  /// Accumulates parameter gradients and returns d loss / d modes.
  Tensor backward(const Tensor& df, Tape& tape);

  [[nodiscard]] ParameterStore& params() { return params_; }
  [[nodiscard]] const ParameterStore& params() const { return params_; }
  [[nodiscard]] const EncodingLayout& layout() const { return layout_; }
  [[nodiscard]] const ArchConfig& arch() const { return arch_; }
  [[nodiscard]] std::uint64_t architecture_hash() const;

 private:
  EncodingLayout layout_;
  ArchConfig arch_;
  ParameterStore params_;
  std::unique_ptr<PiTrunk> trunk_;
  std::unique_ptr<Conv1dLayer> mode_stem_;
  std::unique_ptr<MergeLayer> merge_;
  std::vector<InceptionBlock> blocks_;
  std::unique_ptr<DiscriminatorHead> head_;
};

}  // namespace gaswarm::nn

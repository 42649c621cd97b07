#include "gaswarm/nn/networks.hpp"

#include <stdexcept>

namespace gaswarm::nn {

void ArchConfig::validate() const {
  if (channels < 1 || branch_width < 1 || stem_kernel < 1 || merge_kernel < 1)
    throw std::invalid_argument("architecture widths and kernels must be positive");
  if (generator_blocks < 0 || discriminator_blocks < 0)
    throw std::invalid_argument("block counts must be nonnegative");
  if (branch_kernels.empty()) throw std::invalid_argument("inception blocks need a branch");
  for (int k : branch_kernels)
    if (k < 1) throw std::invalid_argument("branch kernels must be positive");
  if (!(beta > 0.0)) throw std::invalid_argument("softplus beta must be positive");
}

nlohmann::json ArchConfig::to_json() const {
  return {{"channels", channels},         {"generator_blocks", generator_blocks},
          {"discriminator_blocks", discriminator_blocks},
          {"branch_kernels", branch_kernels}, {"branch_width", branch_width},
          {"stem_kernel", stem_kernel},   {"merge_kernel", merge_kernel},
          {"beta", beta}};
}

ArchConfig ArchConfig::from_json(const nlohmann::json& j) {
  ArchConfig a;
  a.channels = j.value("channels", a.channels);
  a.generator_blocks = j.value("generator_blocks", a.generator_blocks);
  a.discriminator_blocks = j.value("discriminator_blocks", a.discriminator_blocks);
  a.branch_kernels = j.value("branch_kernels", a.branch_kernels);
  a.branch_width = j.value("branch_width", a.branch_width);
  a.stem_kernel = j.value("stem_kernel", a.stem_kernel);
  a.merge_kernel = j.value("merge_kernel", a.merge_kernel);
  a.beta = j.value("beta", a.beta);
  a.validate();
  return a;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

PiTrunk::PiTrunk(ParameterStore& store, const std::string& name, const EncodingLayout& layout,
                 const ArchConfig& arch, data::RandomSource& rng)
    : flow_(store, name + ".stem_flow", layout.boundary, arch.channels, arch.stem_kernel,
            Padding::Same, rng),
      pressure_(store, name + ".stem_pressure", layout.boundary, arch.channels, arch.stem_kernel,
                Padding::Same, rng),
      state_(store, name + ".stem_state", layout.state_width(), arch.channels, 1, Padding::Same,
             rng),
      merge_fp_(store, name + ".merge_fp", arch.channels, arch.channels, arch.merge_kernel, rng),
      merge_state_(store, name + ".merge_state", arch.channels, arch.channels, arch.merge_kernel,
                   rng) {}

Tensor PiTrunk::forward(const EncodedBatch& x, Tape* tape) const {
  auto stem = [&](const Conv1dLayer& layer, const Tensor& in) {
    Tensor pre = layer.forward(in, tape);
    Tensor out = relu(pre);
    if (tape) tape->push(std::move(pre));
    return out;
  };
  const Tensor f = stem(flow_, x.flow);
  const Tensor p = stem(pressure_, x.pressure);
  Tensor m = merge_fp_.forward(f, p, tape);
  const Tensor mr = relu(m);
  if (tape) tape->push(std::move(m));
  const Tensor s = stem(state_, x.state);
  return merge_state_.forward(mr, s, tape);
}

void PiTrunk::backward(const Tensor& dy, Tape& tape) const {
  auto [dm, ds] = merge_state_.backward(dy, tape);
  const Tensor s_pre = tape.pop();
  (void)state_.backward(relu_backward(s_pre, ds), tape);
  const Tensor m = tape.pop();
  auto [df, dp] = merge_fp_.backward(relu_backward(m, dm), tape);
  const Tensor p_pre = tape.pop();
  (void)pressure_.backward(relu_backward(p_pre, dp), tape);
  const Tensor f_pre = tape.pop();
  (void)flow_.backward(relu_backward(f_pre, df), tape);
}

namespace {

std::uint64_t hash_of(const char* kind, const EncodingLayout& layout, const ArchConfig& arch,
                      const ParameterStore& params) {
  return fnv1a(std::string(kind) + "|" + arch.to_json().dump() + "|" + layout.to_json().dump() +
               "|" + params.describe());
}

}  // namespace

GeneratorNet::GeneratorNet(const EncodingLayout& layout, const ArchConfig& arch,
                           std::uint64_t seed)
    : layout_(layout), arch_(arch) {
  arch_.validate();
  auto rng = data::SplitMix64::stream(seed, 101, 0);
  trunk_ = std::make_unique<PiTrunk>(params_, "g.trunk", layout_, arch_, rng);
  blocks_.reserve(arch_.generator_blocks);
  for (int i = 0; i < arch_.generator_blocks; ++i)
    blocks_.emplace_back(params_, "g.block" + std::to_string(i), arch_.channels,
                         arch_.branch_kernels, arch_.branch_width, rng);
  head_ = std::make_unique<GeneratorHead>(params_, "g.head", arch_.channels, layout_.modes, rng);
}

Tensor GeneratorNet::forward(const EncodedBatch& x, Tape* tape) const {
  Tensor h = trunk_->forward(x, tape);
  for (const InceptionBlock& b : blocks_) h = b.forward(h, tape);
  Tensor y = head_->forward(h, temperature_, tape);
  y.require_finite("generator output");
  return y;
}

void GeneratorNet::backward(const Tensor& dprobs, Tape& tape) {
  Tensor d = head_->backward(dprobs, temperature_, tape);
  for (std::size_t i = blocks_.size(); i-- > 0;) d = blocks_[i].backward(d, tape);
  trunk_->backward(d, tape);
}

std::uint64_t GeneratorNet::architecture_hash() const {
  return hash_of("generator", layout_, arch_, params_);
}

DiscriminatorNet::DiscriminatorNet(const EncodingLayout& layout, const ArchConfig& arch,
                                   std::uint64_t seed)
    : layout_(layout), arch_(arch) {
  arch_.validate();
  auto rng = data::SplitMix64::stream(seed, 102, 0);
  trunk_ = std::make_unique<PiTrunk>(params_, "d.trunk", layout_, arch_, rng);
  mode_stem_ = std::make_unique<Conv1dLayer>(params_, "d.stem_modes", layout_.modes,
                                             arch_.channels, arch_.stem_kernel, Padding::Same, rng);
  merge_ = std::make_unique<MergeLayer>(params_, "d.merge_modes", arch_.channels, arch_.channels,
                                        arch_.merge_kernel, rng);
  blocks_.reserve(arch_.discriminator_blocks);
  for (int i = 0; i < arch_.discriminator_blocks; ++i)
    blocks_.emplace_back(params_, "d.block" + std::to_string(i), arch_.channels,
                         arch_.branch_kernels, arch_.branch_width, rng);
  head_ = std::make_unique<DiscriminatorHead>(params_, "d.head", arch_.channels, rng);
}

Tensor DiscriminatorNet::forward(const Tensor& modes, const EncodedBatch& x, Tape* tape) const {
  require_rank3(modes, "discriminator modes");
  if (modes.dim(0) != x.batch() || modes.dim(1) != layout_.modes || modes.dim(2) != x.steps())
    throw ShapeMismatch("discriminator modes " + modes.shape_string() + " do not fit the batch");
  modes.require_finite("discriminator modes");
  Tensor t = trunk_->forward(x, tape);
  const Tensor tr = relu(t);
  if (tape) tape->push(std::move(t));
  Tensor zpre = mode_stem_->forward(modes, tape);
  const Tensor z = relu(zpre);
  if (tape) tape->push(std::move(zpre));
  Tensor h = merge_->forward(tr, z, tape);
  for (const InceptionBlock& b : blocks_) h = b.forward(h, tape);
  Tensor y = head_->forward(h, arch_.beta, tape);
  y.require_finite("discriminator output");
  return y;
}

Tensor DiscriminatorNet::backward(const Tensor& df, Tape& tape) {
  Tensor d = head_->backward(df, arch_.beta, tape);
  for (std::size_t i = blocks_.size(); i-- > 0;) d = blocks_[i].backward(d, tape);
  auto [dt, dz] = merge_->backward(d, tape);
  const Tensor zpre = tape.pop();
  Tensor dmodes = mode_stem_->backward(relu_backward(zpre, dz), tape);
  const Tensor t = tape.pop();
  trunk_->backward(relu_backward(t, dt), tape);
  return dmodes;
}

std::uint64_t DiscriminatorNet::architecture_hash() const {
  return hash_of("discriminator", layout_, arch_, params_);
}

}  // namespace gaswarm::nn

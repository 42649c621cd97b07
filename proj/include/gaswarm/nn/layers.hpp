#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "gaswarm/data/rng.hpp"
#include "gaswarm/nn/ops.hpp"
#include "gaswarm/nn/tensor.hpp"

namespace gaswarm::nn {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

/// Named trainable tensors with gradient buffers. Parameters keep their
/// address for the lifetime of the store.
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  /// Throws std::invalid_argument on a duplicate name.
  Parameter& add(std::string name, std::vector<int> shape);
  [[nodiscard]] Parameter* find(const std::string& name);
  [[nodiscard]] const Parameter* find(const std::string& name) const;
  [[nodiscard]] std::size_t size() const { return params_.size(); }
  [[nodiscard]] Parameter& operator[](std::size_t i) { return *params_[i]; }
  [[nodiscard]] const Parameter& operator[](std::size_t i) const { return *params_[i]; }

  void zero_grad();
  [[nodiscard]] std::size_t scalar_count() const;
  /// "name(shape);..." in insertion order.
  [[nodiscard]] std::string describe() const;

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

/// Saved forward values, consumed in reverse order by the backward passes.
class Tape {
 public:
  void push(Tensor t) { saved_.push_back(std::move(t)); }
  Tensor pop();
  [[nodiscard]] bool empty() const { return saved_.empty(); }

 private:
  std::vector<Tensor> saved_;
};

/// Fan-in scaled uniform weights in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
void init_fan_in(Tensor& w, int fan_in, data::RandomSource& rng);

class Conv1dLayer {
 public:
  Conv1dLayer(ParameterStore& store, const std::string& name, int cin, int cout, int kernel,
              Padding pad, data::RandomSource& rng);
  [[nodiscard]] Tensor forward(const Tensor& x, Tape* tape) const;
  [[nodiscard]] Tensor backward(const Tensor& dy, Tape& tape) const;
  [[nodiscard]] Parameter& weight() const { return *w_; }
  [[nodiscard]] Parameter& bias() const { return *b_; }

 private:
  Parameter* w_;
  Parameter* b_;
  Padding pad_;
};

class MergeLayer {
 public:
  MergeLayer(ParameterStore& store, const std::string& name, int channels, int cout, int kernel,
             data::RandomSource& rng);
  [[nodiscard]] Tensor forward(const Tensor& a, const Tensor& b, Tape* tape) const;
  [[nodiscard]] std::pair<Tensor, Tensor> backward(const Tensor& dy, Tape& tape) const;
  [[nodiscard]] Parameter& weight() const { return *w_; }
  [[nodiscard]] Parameter& bias() const { return *b_; }

 private:
  Parameter* w_;
  Parameter* b_;
};

/// Pre-activation residual block: relu, parallel branches (1x1 reduction,
/// then relu and a k-wide convolution when k > 1), concatenation, 1x1
/// projection back to the input width, identity skip added.
class InceptionBlock {
 public:
  InceptionBlock(ParameterStore& store, const std::string& name, int channels,
                 const std::vector<int>& kernels, int width, data::RandomSource& rng);
  [[nodiscard]] Tensor forward(const Tensor& x, Tape* tape) const;
  [[nodiscard]] Tensor backward(const Tensor& dy, Tape& tape) const;

 private:
  struct Branch {
    int kernel;
    Conv1dLayer reduce;
    std::unique_ptr<Conv1dLayer> conv;
  };
  std::vector<Branch> branches_;
  std::unique_ptr<Conv1dLayer> project_;
  int width_;
};

/// relu, 1x1 convolution to one channel per mode, softmax with temperature
/// over modes.
class GeneratorHead {
 public:
  GeneratorHead(ParameterStore& store, const std::string& name, int channels, int modes,
                data::RandomSource& rng);
  [[nodiscard]] Tensor forward(const Tensor& x, double temperature, Tape* tape) const;
  [[nodiscard]] Tensor backward(const Tensor& dy, double temperature, Tape& tape) const;

 private:
  Conv1dLayer conv_;
};

/// relu, 1x1 convolution to one channel, mean over time, softplus. Output
/// shape (batch).
class DiscriminatorHead {
 public:
  DiscriminatorHead(ParameterStore& store, const std::string& name, int channels,
                    data::RandomSource& rng);
  [[nodiscard]] Tensor forward(const Tensor& x, double beta, Tape* tape) const;
  [[nodiscard]] Tensor backward(const Tensor& dy, double beta, Tape& tape) const;

 private:
  Conv1dLayer conv_;
};

}  // namespace gaswarm::nn

#pragma once

#include <cstdint>
#include <vector>

#include "gaswarm/nn/layers.hpp"

namespace gaswarm::nn {

struct AdamConfig {
  double lr = 1e-3;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction. Weight decay is decoupled: after the Adam
/// update each parameter is reduced by lr * weight_decay * parameter.
class Adam {
 public:
  Adam(ParameterStore& params, AdamConfig config);

  void step();
  void set_lr(double lr) { config_.lr = lr; }
  [[nodiscard]] double lr() const { return config_.lr; }
  [[nodiscard]] std::int64_t steps() const { return t_; }
  [[nodiscard]] const AdamConfig& config() const { return config_; }

  /// Moment buffers in parameter order, for checkpoints.
  [[nodiscard]] const std::vector<Tensor>& first_moments() const { return m_; }
  [[nodiscard]] const std::vector<Tensor>& second_moments() const { return v_; }
  void restore(std::int64_t steps, std::vector<Tensor> m, std::vector<Tensor> v);

 private:
  ParameterStore* params_;
  AdamConfig config_;
  std::int64_t t_ = 0;
  std::vector<Tensor> m_, v_;
};

}  // namespace gaswarm::nn

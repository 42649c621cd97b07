#include "gaswarm/nn/adam.hpp"

#include <cmath>

namespace gaswarm::nn {

Adam::Adam(ParameterStore& params, AdamConfig config) : params_(&params), config_(config) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_.emplace_back(params[i].value.shape());
    v_.emplace_back(params[i].value.shape());
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_->size(); ++i) {
    Parameter& p = (*params_)[i];
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double g = p.grad[k];
      m[k] = config_.beta1 * m[k] + (1.0 - config_.beta1) * g;
      v[k] = config_.beta2 * v[k] + (1.0 - config_.beta2) * g * g;
      const double mhat = m[k] / c1;
      const double vhat = v[k] / c2;
      p.value[k] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
      p.value[k] -= config_.lr * config_.weight_decay * p.value[k];
    }
  }
}

void Adam::restore(std::int64_t steps, std::vector<Tensor> m, std::vector<Tensor> v) {
  if (m.size() != m_.size() || v.size() != v_.size())
    throw ShapeMismatch("optimizer state does not match the parameters");
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i].shape() != m_[i].shape() || v[i].shape() != v_[i].shape())
      throw ShapeMismatch("optimizer state shape differs for " + (*params_)[i].name);
  t_ = steps;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace gaswarm::nn

#include "gaswarm/nn/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace gaswarm::nn {

namespace {
std::size_t volume(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw ShapeMismatch("negative tensor dimension");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}
}  // namespace

Tensor::Tensor(std::vector<int> shape, double fill)
    : shape_(std::move(shape)), data_(volume(shape_), fill) {}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != volume(shape_))
    throw ShapeMismatch("data length " + std::to_string(data_.size()) + " does not match shape " +
                        shape_string());
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor::require_finite(const char* where) const {
  for (double v : data_)
    if (!std::isfinite(v)) throw NonFiniteValue(std::string("non-finite value at ") + where);
}

std::string Tensor::shape_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape_[i]);
  }
  return s + ")";
}

void require_rank3(const Tensor& t, const char* what) {
  if (t.rank() != 3)
    throw ShapeMismatch(std::string(what) + ": expected (batch, channels, time), got " +
                        t.shape_string());
}

}  // namespace gaswarm::nn

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gaswarm::nn {

class ShapeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonFiniteValue : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Dense row-major float64 array. Network activations use the 3-D layout
/// (batch, channels, time).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, double fill = 0.0);
  Tensor(std::vector<int> shape, std::vector<double> data);

  [[nodiscard]] const std::vector<int>& shape() const { return shape_; }
  [[nodiscard]] int dim(std::size_t i) const { return shape_.at(i); }
  [[nodiscard]] std::size_t rank() const { return shape_.size(); }
  [[nodiscard]] std::size_t size() const { return data_.size(); }

  [[nodiscard]] std::vector<double>& data() { return data_; }
  [[nodiscard]] const std::vector<double>& data() const { return data_; }
  [[nodiscard]] double* ptr() { return data_.data(); }
  [[nodiscard]] const double* ptr() const { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  /// 3-D element access.
  double& at(int b, int c, int t) { return data_[index(b, c, t)]; }
  [[nodiscard]] double at(int b, int c, int t) const { return data_[index(b, c, t)]; }

  void fill(double v);
  /// Throws NonFiniteValue naming `where` if any entry is NaN or infinite.
  void require_finite(const char* where) const;
  [[nodiscard]] std::string shape_string() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  [[nodiscard]] std::size_t index(int b, int c, int t) const {
    return (static_cast<std::size_t>(b) * shape_[1] + c) * shape_[2] + t;
  }

  std::vector<int> shape_;
  std::vector<double> data_;
};

/// Throws ShapeMismatch unless the tensor is 3-D.
void require_rank3(const Tensor& t, const char* what);

}  // namespace gaswarm::nn

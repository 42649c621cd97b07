#pragma once

#include <cstdint>
#include <limits>

namespace gaswarm::train {

/// Triangular cyclic learning rate. lr(0) = base; rises linearly to max over
/// step_size_up steps, falls back over the same number, repeats.
class CyclicLR {
 public:
  CyclicLR(double base_lr, double max_lr, int step_size_up);

  [[nodiscard]] double lr() const { return lr_at(step_); }
  [[nodiscard]] double lr_at(std::int64_t step) const;
  /// Advances one optimizer step and returns the new rate.
  double step();

 private:
  double base_, max_;
  int up_;
  std::int64_t step_ = 0;
};

/// Multiplies the rate by `factor` once the monitored loss has failed to
/// improve for more than `patience` consecutive epochs. Improvement means
/// falling below best * (1 - threshold).
class ReduceLROnPlateau {
 public:
  ReduceLROnPlateau(double lr, int patience, double factor, double threshold = 1e-4,
                    double min_lr = 0.0);

  /// Records one epoch's metric and returns the rate to use next.
  double step(double metric);
  [[nodiscard]] double lr() const { return lr_; }
  [[nodiscard]] double best() const { return best_; }

 private:
  double lr_;
  int patience_;
  double factor_, threshold_, min_lr_;
  double best_ = std::numeric_limits<double>::infinity();
  int bad_epochs_ = 0;
};

}  // namespace gaswarm::train

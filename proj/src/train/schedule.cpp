#include "gaswarm/train/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "gaswarm/train/config.hpp"

namespace gaswarm::train {

CyclicLR::CyclicLR(double base_lr, double max_lr, int step_size_up)
    : base_(base_lr), max_(max_lr), up_(step_size_up) {
  if (step_size_up < 1 || max_lr < base_lr) throw TrainError("invalid cyclic learning rate");
}

double CyclicLR::lr_at(std::int64_t step) const {
  const double s = static_cast<double>(up_);
  const double cycle = std::floor(1.0 + static_cast<double>(step) / (2.0 * s));
  const double x = std::abs(static_cast<double>(step) / s - 2.0 * cycle + 1.0);
  return base_ + (max_ - base_) * std::max(0.0, 1.0 - x);
}

double CyclicLR::step() {
  ++step_;
  return lr();
}

ReduceLROnPlateau::ReduceLROnPlateau(double lr, int patience, double factor, double threshold,
                                     double min_lr)
    : lr_(lr), patience_(patience), factor_(factor), threshold_(threshold), min_lr_(min_lr) {}

double ReduceLROnPlateau::step(double metric) {
  if (metric < best_ * (1.0 - threshold_)) {
    best_ = metric;
    bad_epochs_ = 0;
  } else if (++bad_epochs_ > patience_) {
    lr_ = std::max(min_lr_, lr_ * factor_);
    bad_epochs_ = 0;
  }
  return lr_;
}

}  // namespace gaswarm::train

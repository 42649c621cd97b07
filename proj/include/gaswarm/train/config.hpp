#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace gaswarm::train {

class TrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyDataset : public TrainError {
 public:
  using TrainError::TrainError;
};

struct TrainConfig {
  int batch_size = 2048;

  int pretrain_epochs = 500;
  double pretrain_lr = 0.005;
  double pretrain_weight_decay = 5e-6;

  double cyclic_max_lr = 5e-4;
  double cyclic_base_lr = 5e-6;
  int cyclic_step_size_up = 10000;
  int num_scenarios = 3200000;  // fresh pi per generator epoch

  int num_data_new = 2048;
  int num_data_old = 8192;
  int num_prelabelled = 8192;
  double ratio_test = 0.1;

  int num_epochs = 10;
  int num_generator_epochs = 25;
  int num_discriminator_epochs = 25;
  double lr = 0.001;
  double weight_decay = 5e-6;
  int plateau_patience = 2;
  double plateau_factor = 0.5;

  // Stopping losses are multiples of quantities measured after pretraining
  // unless set explicitly.
  double stopping_factor_discriminator = 3.0;
  double stopping_factor_generator = 0.9;
  std::optional<double> stopping_loss_discriminator;
  std::optional<double> stopping_loss_generator;

  double objective_scale = 500.0;
  std::uint64_t seed = 1;
  int threads = 1;

  [[nodiscard]] static TrainConfig paper();
  /// Counts shrunk for a single CPU: 20 pretraining epochs, 2,000 pi per
  /// generator epoch, 64 new / 256 old / 256 prelabelled samples, batch 32.
  [[nodiscard]] static TrainConfig desk();
  /// "paper" or "desk"; throws TrainError otherwise.
  [[nodiscard]] static TrainConfig profile(const std::string& name);

  void validate() const;
  [[nodiscard]] nlohmann::json to_json() const;
  /// Starts from `base` and replaces every key present in `j`.
  [[nodiscard]] static TrainConfig from_json(const nlohmann::json& j, const TrainConfig& base);
  [[nodiscard]] static TrainConfig from_json(const nlohmann::json& j);
};

}  // namespace gaswarm::train

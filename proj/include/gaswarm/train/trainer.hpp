#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaswarm/data/dataset.hpp"
#include "gaswarm/nn/adam.hpp"
#include "gaswarm/nn/networks.hpp"
#include "gaswarm/train/config.hpp"

namespace gaswarm::train {

// Stream ids for training randomness, disjoint from the data generator's.
enum TrainStream : std::uint64_t {
  kStreamSplit = 10,
  kStreamShuffle = 11,
  kStreamGeneratorPi = 12,
  kStreamFreshData = 13,
  kStreamMix = 14,
};

/// mean_i |fhat_i - f_i / scale|. `grad`, when given, receives d loss / d fhat
/// (sign / batch, 0 at a tie).
double discriminator_loss(const nn::Tensor& fhat, const std::vector<double>& f, double scale,
                          nn::Tensor* grad = nullptr);
[[nodiscard]] double discriminator_loss(double fhat, double f, double scale);
/// mean_i |fhat_i - 0|; fhat is a softplus output so this is the mean.
double generator_loss(const nn::Tensor& fhat, nn::Tensor* grad = nullptr);

/// Labelled samples encoded once. All samples share one horizon.
struct TrainingSet {
  nn::EncodedBatch x;
  nn::Tensor z;
  std::vector<double> f;  // unscaled objectives

  [[nodiscard]] std::size_t size() const { return f.size(); }
};

[[nodiscard]] TrainingSet make_training_set(const gas::GasNetwork& net,
                                            const nn::EncodingLayout& layout,
                                            const std::vector<data::LabelledSample>& samples);
/// Rows order[begin, end) of `set`.
[[nodiscard]] TrainingSet gather(const TrainingSet& set, const std::vector<std::size_t>& order,
                                 std::size_t begin, std::size_t end);

/// Fisher-Yates permutation of 0..n-1.
[[nodiscard]] std::vector<std::size_t> shuffled_indices(std::size_t n, data::RandomSource& rng);

/// Scaled L1 loss of `disc` over `set`, forward only.
[[nodiscard]] double evaluate_l1(const nn::DiscriminatorNet& disc, const TrainingSet& set,
                                 int batch_size, double scale);
/// Mean prediction (scaled units) over `set`.
[[nodiscard]] double mean_prediction(const nn::DiscriminatorNet& disc, const TrainingSet& set,
                                     int batch_size);

/// One pass over `set` in the given order: zero grads, forward, L1 loss,
/// backward, Adam step per batch. Returns the mean batch loss.
double discriminator_training_loop(nn::DiscriminatorNet& disc, const TrainingSet& set,
                                   const std::vector<std::size_t>& order, int batch_size,
                                   nn::Adam& optimizer, double scale);

struct EpochLoss {
  double train = 0.0;
  double test = 0.0;
  double lr = 0.0;
};

struct PretrainResult {
  double initial_test_loss = 0.0;  // untrained network on the test split
  std::vector<EpochLoss> epochs;
  double final_test_loss = 0.0;
  double validation_loss = 0.0;
  std::size_t train_size = 0, test_size = 0, validation_size = 0;

  [[nodiscard]] nlohmann::json to_json() const;
  [[nodiscard]] static PretrainResult from_json(const nlohmann::json& j);
};

/// Splits 8:1:1 into train/test/validation, runs pretrain_epochs epochs with
/// Adam and a plateau schedule on the test loss. Throws EmptyDataset with
/// fewer than 3 samples.
PretrainResult pretrain_discriminator(nn::DiscriminatorNet& disc, const gas::GasNetwork& net,
                                      const std::vector<data::LabelledSample>& labelled,
                                      const TrainConfig& config);

/// Draws fresh scenarios: an initial state taken uniformly from the offline
/// data and a newly sampled boundary forecast.
class ScenarioSource {
 public:
  ScenarioSource(const gas::GasNetwork& net, data::SamplerConfig sampler,
                 data::GenerationConfig generation,
                 const std::vector<data::LabelledSample>& offline);

  [[nodiscard]] gas::Instance draw(data::RandomSource& rng) const;
  [[nodiscard]] const gas::GasNetwork& network() const { return *net_; }
  [[nodiscard]] const data::GenerationConfig& generation() const { return generation_; }
  [[nodiscard]] std::size_t num_states() const { return states_.size(); }

 private:
  const gas::GasNetwork* net_;
  data::SamplerConfig sampler_;
  data::GenerationConfig generation_;
  data::SeedStatePool states_;
};

struct GeneratorEpoch {
  double temperature = 0.0;
  double mean_loss = 0.0;
  double first_batch_loss = 0.0;  // before the first update
  int steps = 0;
};

/// num_scenarios fresh pi in batches; descends the generator on the
/// discriminator's prediction with a cyclic rate. The discriminator's values
/// are left untouched. `key` separates the random draws of different calls.
GeneratorEpoch generator_training(nn::GeneratorNet& gen, nn::DiscriminatorNet& disc,
                                  const ScenarioSource& source, const TrainConfig& config,
                                  std::uint64_t key);

struct FreshData {
  std::vector<data::LabelledSample> samples;  // old tail followed by new
  int generated = 0;
  int failed = 0;
};

/// num_data_new fresh pi labelled with the rounded generator output and the
/// oracle objective, appended to the last num_data_old samples of `old`.
/// Solver failures are skipped and logged.
FreshData prepare_discriminator_training_data(const nn::GeneratorNet& gen,
                                              const ScenarioSource& source,
                                              const std::vector<data::LabelledSample>& old,
                                              const TrainConfig& config, std::uint64_t key);

/// `data` plus a random subset of num_prelabelled prelabelled samples, in a
/// seeded random interleaving.
[[nodiscard]] std::vector<data::LabelledSample> mix_data(
    const std::vector<data::LabelledSample>& data,
    const std::vector<data::LabelledSample>& prelabelled, int num_prelabelled,
    data::RandomSource& rng);

struct Split {
  std::vector<data::LabelledSample> train, test;
};
/// Last round(ratio * n) samples (at least one when n >= 2) form the test part.
[[nodiscard]] Split split_data(std::vector<data::LabelledSample> data, double ratio_test);

struct AlternatingEpoch {
  std::vector<GeneratorEpoch> generator;
  std::vector<EpochLoss> discriminator;
  std::size_t data_size = 0;
  int new_samples = 0;
  int failed_samples = 0;
};

struct History {
  double stopping_loss_discriminator = 0.0;
  double stopping_loss_generator = 0.0;
  double temperature = 0.0;
  std::vector<AlternatingEpoch> epochs;

  [[nodiscard]] nlohmann::json to_json() const;
};

/// Alternates generator and discriminator phases for num_epochs outer epochs.
/// The temperature starts at 0 and rises by 1 before every generator epoch,
/// continuing across outer epochs. With `checkpoint_dir` the networks,
/// optimizer moments and history are written after every outer epoch.
History train_alternating(nn::GeneratorNet& gen, nn::DiscriminatorNet& disc,
                          const ScenarioSource& source,
                          const std::vector<data::LabelledSample>& prelabelled,
                          const TrainConfig& config, const PretrainResult& pretrain,
                          const std::optional<std::string>& checkpoint_dir = std::nullopt);

/// Writes the moment buffers of both optimizers as a weights container.
void save_optimizer_state(const std::string& path, const nn::Adam* generator,
                          const nn::Adam* discriminator);

}  // namespace gaswarm::train

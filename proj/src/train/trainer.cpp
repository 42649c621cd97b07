#include "gaswarm/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>

#include "gaswarm/log.hpp"
#include "gaswarm/nn/encoding.hpp"
#include "gaswarm/nn/weights.hpp"
#include "gaswarm/parallel.hpp"
#include "gaswarm/train/schedule.hpp"

namespace gaswarm::train {

using data::LabelledSample;
using data::SplitMix64;
using nn::Tensor;

namespace {

Tensor take_rows(const Tensor& t, const std::vector<std::size_t>& order, std::size_t begin,
                 std::size_t end) {
  std::vector<int> shape = t.shape();
  const std::size_t row = t.size() / static_cast<std::size_t>(shape[0]);
  shape[0] = static_cast<int>(end - begin);
  Tensor out(shape);
  for (std::size_t i = begin; i < end; ++i)
    std::copy_n(t.ptr() + order[i] * row, row, out.ptr() + (i - begin) * row);
  return out;
}

std::vector<std::size_t> identity_order(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

std::vector<double> take(const std::vector<double>& f, const std::vector<std::size_t>& order,
                         std::size_t begin, std::size_t end) {
  std::vector<double> out;
  out.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) out.push_back(f[order[i]]);
  return out;
}

nn::EncodedBatch encode_instances(const gas::GasNetwork& net, const nn::EncodingLayout& layout,
                                  const std::vector<gas::Instance>& pis) {
  std::vector<const gas::Instance*> ptrs;
  ptrs.reserve(pis.size());
  for (const auto& p : pis) ptrs.push_back(&p);
  return nn::encode(net, layout, ptrs);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw TrainError("cannot write " + path.string());
  out << text;
}

}  // namespace

double discriminator_loss(const Tensor& fhat, const std::vector<double>& f, double scale,
                          Tensor* grad) {
  if (fhat.size() != f.size() || f.empty())
    throw nn::ShapeMismatch("discriminator_loss: prediction and label counts differ");
  const double n = static_cast<double>(f.size());
  double loss = 0.0;
  if (grad) *grad = Tensor(fhat.shape());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = fhat[i] - f[i] / scale;
    loss += std::abs(d);
    if (grad) (*grad)[i] = d > 0 ? 1.0 / n : (d < 0 ? -1.0 / n : 0.0);
  }
  return loss / n;
}

double discriminator_loss(double fhat, double f, double scale) {
  return std::abs(fhat - f / scale);
}

double generator_loss(const Tensor& fhat, Tensor* grad) {
  if (fhat.size() == 0) throw nn::ShapeMismatch("generator_loss: empty batch");
  const double n = static_cast<double>(fhat.size());
  double loss = 0.0;
  for (double v : fhat.data()) loss += std::abs(v);
  if (grad) {
    *grad = Tensor(fhat.shape());
    for (std::size_t i = 0; i < fhat.size(); ++i)
      (*grad)[i] = fhat[i] > 0 ? 1.0 / n : (fhat[i] < 0 ? -1.0 / n : 0.0);
  }
  return loss / n;
}

TrainingSet make_training_set(const gas::GasNetwork& net, const nn::EncodingLayout& layout,
                              const std::vector<LabelledSample>& samples) {
  if (samples.empty()) throw EmptyDataset("no labelled samples");
  std::vector<const gas::Instance*> pis;
  std::vector<const gas::ModeSequence*> zs;
  TrainingSet set;
  for (const auto& s : samples) {
    pis.push_back(&s.pi);
    zs.push_back(&s.z1);
    set.f.push_back(s.objective);
  }
  set.x = nn::encode(net, layout, pis);
  set.z = nn::encode_modes(zs, layout.modes);
  if (set.z.dim(2) != set.x.flow.dim(2))
    throw nn::ShapeMismatch("mode sequence length differs from the horizon");
  return set;
}

TrainingSet gather(const TrainingSet& set, const std::vector<std::size_t>& order,
                   std::size_t begin, std::size_t end) {
  return TrainingSet{{take_rows(set.x.flow, order, begin, end),
                      take_rows(set.x.pressure, order, begin, end),
                      take_rows(set.x.state, order, begin, end)},
                     take_rows(set.z, order, begin, end),
                     take(set.f, order, begin, end)};
}

std::vector<std::size_t> shuffled_indices(std::size_t n, data::RandomSource& rng) {
  std::vector<std::size_t> v = identity_order(n);
  for (std::size_t i = n; i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
  return v;
}

double evaluate_l1(const nn::DiscriminatorNet& disc, const TrainingSet& set, int batch_size,
                   double scale) {
  if (set.size() == 0) throw EmptyDataset("evaluation set is empty");
  const auto order = identity_order(set.size());
  double total = 0.0;
  for (std::size_t b = 0; b < set.size(); b += batch_size) {
    const std::size_t e = std::min(set.size(), b + static_cast<std::size_t>(batch_size));
    const TrainingSet part = gather(set, order, b, e);
    total += discriminator_loss(disc.forward(part.z, part.x), part.f, scale) *
             static_cast<double>(e - b);
  }
  return total / static_cast<double>(set.size());
}

double mean_prediction(const nn::DiscriminatorNet& disc, const TrainingSet& set, int batch_size) {
  if (set.size() == 0) throw EmptyDataset("evaluation set is empty");
  const auto order = identity_order(set.size());
  double total = 0.0;
  for (std::size_t b = 0; b < set.size(); b += batch_size) {
    const std::size_t e = std::min(set.size(), b + static_cast<std::size_t>(batch_size));
    const TrainingSet part = gather(set, order, b, e);
    const Tensor fhat = disc.forward(part.z, part.x);
    for (double v : fhat.data()) total += v;
  }
  return total / static_cast<double>(set.size());
}

double discriminator_training_loop(nn::DiscriminatorNet& disc, const TrainingSet& set,
                                   const std::vector<std::size_t>& order, int batch_size,
                                   nn::Adam& optimizer, double scale) {
  if (order.empty()) throw EmptyDataset("training set is empty");
  double sum = 0.0;
  int batches = 0;
  for (std::size_t b = 0; b < order.size(); b += batch_size) {
    const std::size_t e = std::min(order.size(), b + static_cast<std::size_t>(batch_size));
    const TrainingSet part = gather(set, order, b, e);
    disc.params().zero_grad();
    nn::Tape tape;
    const Tensor fhat = disc.forward(part.z, part.x, &tape);
    Tensor grad;
    sum += discriminator_loss(fhat, part.f, scale, &grad);
    (void)disc.backward(grad, tape);
    optimizer.step();
    ++batches;
  }
  return sum / batches;
}

nlohmann::json PretrainResult::to_json() const {
  nlohmann::json ep = nlohmann::json::array();
  for (const auto& e : epochs) ep.push_back({{"train", e.train}, {"test", e.test}, {"lr", e.lr}});
  return {{"initial_test_loss", initial_test_loss},
          {"final_test_loss", final_test_loss},
          {"validation_loss", validation_loss},
          {"train_size", train_size},
          {"test_size", test_size},
          {"validation_size", validation_size},
          {"epochs", ep}};
}

PretrainResult PretrainResult::from_json(const nlohmann::json& j) {
  PretrainResult r;
  r.initial_test_loss = j.at("initial_test_loss");
  r.final_test_loss = j.at("final_test_loss");
  r.validation_loss = j.at("validation_loss");
  r.train_size = j.at("train_size");
  r.test_size = j.at("test_size");
  r.validation_size = j.at("validation_size");
  for (const auto& e : j.at("epochs")) r.epochs.push_back({e.at("train"), e.at("test"), e.at("lr")});
  return r;
}

PretrainResult pretrain_discriminator(nn::DiscriminatorNet& disc, const gas::GasNetwork& net,
                                      const std::vector<LabelledSample>& labelled,
                                      const TrainConfig& config) {
  config.validate();
  if (labelled.size() < 3) throw EmptyDataset("pretraining needs at least 3 labelled samples");
  const TrainingSet all = make_training_set(net, disc.layout(), labelled);

  SplitMix64 split_rng = SplitMix64::stream(config.seed, kStreamSplit, 0);
  const std::vector<std::size_t> perm = shuffled_indices(all.size(), split_rng);
  const std::size_t n = all.size();
  const std::size_t n_test = std::max<std::size_t>(1, n / 10);
  const std::size_t n_val = std::max<std::size_t>(1, n / 10);
  const std::size_t n_train = n - n_test - n_val;
  const TrainingSet train = gather(all, perm, 0, n_train);
  const TrainingSet test = gather(all, perm, n_train, n_train + n_test);
  const TrainingSet validation = gather(all, perm, n_train + n_test, n);

  PretrainResult r;
  r.train_size = n_train;
  r.test_size = n_test;
  r.validation_size = n_val;
  r.initial_test_loss = evaluate_l1(disc, test, config.batch_size, config.objective_scale);
  r.final_test_loss = r.initial_test_loss;

  nn::Adam opt(disc.params(), {.lr = config.pretrain_lr,
                               .weight_decay = config.pretrain_weight_decay});
  ReduceLROnPlateau plateau(config.pretrain_lr, config.plateau_patience, config.plateau_factor);
  for (int epoch = 0; epoch < config.pretrain_epochs; ++epoch) {
    SplitMix64 rng = SplitMix64::stream(config.seed, kStreamShuffle, static_cast<std::uint64_t>(epoch));
    const auto order = shuffled_indices(train.size(), rng);
    EpochLoss e;
    e.lr = opt.lr();
    e.train = discriminator_training_loop(disc, train, order, config.batch_size, opt,
                                          config.objective_scale);
    e.test = evaluate_l1(disc, test, config.batch_size, config.objective_scale);
    opt.set_lr(plateau.step(e.test));
    r.epochs.push_back(e);
    r.final_test_loss = e.test;
    log::info("pretrain epoch {}: train {:.4f} test {:.4f} lr {:.2e}", epoch + 1, e.train, e.test,
              e.lr);
  }
  r.validation_loss = evaluate_l1(disc, validation, config.batch_size, config.objective_scale);
  return r;
}

ScenarioSource::ScenarioSource(const gas::GasNetwork& net, data::SamplerConfig sampler,
                               data::GenerationConfig generation,
                               const std::vector<LabelledSample>& offline)
    : net_(&net), sampler_(std::move(sampler)), generation_(std::move(generation)) {
  if (offline.empty()) throw EmptyDataset("no offline data to draw initial states from");
  generation_.horizon = offline.front().pi.horizon;
  generation_.granularity_s = offline.front().pi.granularity_s;
  for (const auto& s : offline) states_.push_back({s.pi.initial_state, s.pi.constants});
}

gas::Instance ScenarioSource::draw(data::RandomSource& rng) const {
  const data::StartState& start = states_[rng.below(states_.size())];
  const data::Forecast forecast = data::sample_forecast(*net_, sampler_, generation_.horizon, rng);
  return data::make_instance(forecast, start, generation_);
}

GeneratorEpoch generator_training(nn::GeneratorNet& gen, nn::DiscriminatorNet& disc,
                                  const ScenarioSource& source, const TrainConfig& config,
                                  std::uint64_t key) {
  nn::Adam opt(gen.params(), {.lr = config.cyclic_base_lr});
  CyclicLR cyclic(config.cyclic_base_lr, config.cyclic_max_lr, config.cyclic_step_size_up);
  GeneratorEpoch r;
  r.temperature = gen.temperature();
  double sum = 0.0;
  std::uint64_t batch_index = 0;
  for (int done = 0; done < config.num_scenarios; done += config.batch_size, ++batch_index) {
    const int b = std::min(config.batch_size, config.num_scenarios - done);
    SplitMix64 rng = SplitMix64::stream(config.seed, kStreamGeneratorPi, (key << 32) | batch_index);
    std::vector<gas::Instance> pis;
    pis.reserve(b);
    for (int i = 0; i < b; ++i) pis.push_back(source.draw(rng));
    const nn::EncodedBatch x = encode_instances(source.network(), gen.layout(), pis);

    gen.params().zero_grad();
    disc.params().zero_grad();
    nn::Tape gtape, dtape;
    const Tensor probs = gen.forward(x, &gtape);
    const Tensor fhat = disc.forward(probs, x, &dtape);
    Tensor grad;
    const double loss = generator_loss(fhat, &grad);
    if (r.steps == 0) r.first_batch_loss = loss;
    gen.backward(disc.backward(grad, dtape), gtape);
    opt.step();
    opt.set_lr(cyclic.step());
    sum += loss;
    ++r.steps;
  }
  disc.params().zero_grad();
  r.mean_loss = sum / r.steps;
  return r;
}

FreshData prepare_discriminator_training_data(const nn::GeneratorNet& gen,
                                              const ScenarioSource& source,
                                              const std::vector<LabelledSample>& old,
                                              const TrainConfig& config, std::uint64_t key) {
  const int n = config.num_data_new;
  SplitMix64 rng = SplitMix64::stream(config.seed, kStreamFreshData, key);
  std::vector<gas::Instance> pis;
  pis.reserve(n);
  for (int i = 0; i < n; ++i) pis.push_back(source.draw(rng));

  std::vector<gas::ModeSequence> z1(n);
  for (int b = 0; b < n; b += config.batch_size) {
    const int e = std::min(n, b + config.batch_size);
    const std::vector<gas::Instance> part(pis.begin() + b, pis.begin() + e);
    const Tensor probs = gen.forward(encode_instances(source.network(), gen.layout(), part));
    for (int i = b; i < e; ++i) z1[i] = nn::argmax_channels(probs, i - b);
  }

  std::vector<std::optional<LabelledSample>> labelled(n);
  parallel_for(static_cast<std::size_t>(n), config.threads, [&](std::size_t i) {
    try {
      const milp::MilpResult res =
          data::solve_fixed(source.network(), pis[i], z1[i], source.generation());
      if (res.status != milp::SolveStatus::Optimal) {
        log::warning("fresh sample {} skipped: fixed model ended {}", i, milp::to_string(res.status));
        return;
      }
      labelled[i] = LabelledSample{pis[i], z1[i], res.objective, config.seed, (key << 32) | i};
    } catch (const std::exception& e) {
      log::warning("fresh sample {} skipped: {}", i, e.what());
    }
  });

  FreshData out;
  const std::size_t keep = std::min(old.size(), static_cast<std::size_t>(config.num_data_old));
  out.samples.assign(old.end() - static_cast<std::ptrdiff_t>(keep), old.end());
  for (auto& s : labelled) {
    if (s) {
      out.samples.push_back(std::move(*s));
      ++out.generated;
    } else {
      ++out.failed;
    }
  }
  return out;
}

std::vector<LabelledSample> mix_data(const std::vector<LabelledSample>& data,
                                     const std::vector<LabelledSample>& prelabelled,
                                     int num_prelabelled, data::RandomSource& rng) {
  const auto pick = shuffled_indices(prelabelled.size(), rng);
  std::vector<LabelledSample> all = data;
  const std::size_t take_n = std::min(prelabelled.size(), static_cast<std::size_t>(num_prelabelled));
  for (std::size_t i = 0; i < take_n; ++i) all.push_back(prelabelled[pick[i]]);
  const auto order = shuffled_indices(all.size(), rng);
  std::vector<LabelledSample> out;
  out.reserve(all.size());
  for (std::size_t i : order) out.push_back(all[i]);
  return out;
}

Split split_data(std::vector<LabelledSample> data, double ratio_test) {
  const std::size_t n = data.size();
  std::size_t n_test = static_cast<std::size_t>(std::llround(ratio_test * static_cast<double>(n)));
  if (n >= 2) n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
  Split s;
  s.test.assign(std::make_move_iterator(data.end() - static_cast<std::ptrdiff_t>(n_test)),
                std::make_move_iterator(data.end()));
  data.resize(n - n_test);
  s.train = std::move(data);
  return s;
}

nlohmann::json History::to_json() const {
  nlohmann::json ep = nlohmann::json::array();
  for (const auto& e : epochs) {
    nlohmann::json g = nlohmann::json::array(), d = nlohmann::json::array();
    for (const auto& x : e.generator)
      g.push_back({{"temperature", x.temperature},
                   {"loss", x.mean_loss},
                   {"first_batch_loss", x.first_batch_loss},
                   {"steps", x.steps}});
    for (const auto& x : e.discriminator)
      d.push_back({{"train", x.train}, {"test", x.test}, {"lr", x.lr}});
    ep.push_back({{"generator", g},
                  {"discriminator", d},
                  {"data_size", e.data_size},
                  {"new_samples", e.new_samples},
                  {"failed_samples", e.failed_samples}});
  }
  return {{"stopping_loss_discriminator", stopping_loss_discriminator},
          {"stopping_loss_generator", stopping_loss_generator},
          {"temperature", temperature},
          {"epochs", ep}};
}

void save_optimizer_state(const std::string& path, const nn::Adam* generator,
                          const nn::Adam* discriminator) {
  nn::Container c;
  c.header = {{"kind", "optimizer_state"}};
  auto add = [&](const char* who, const nn::Adam* opt) {
    if (!opt) return;
    c.header[who] = {{"steps", opt->steps()}, {"lr", opt->lr()}};
    for (std::size_t i = 0; i < opt->first_moments().size(); ++i) {
      c.arrays.emplace_back(std::string(who) + ".m." + std::to_string(i), opt->first_moments()[i]);
      c.arrays.emplace_back(std::string(who) + ".v." + std::to_string(i), opt->second_moments()[i]);
    }
  };
  add("generator", generator);
  add("discriminator", discriminator);
  nn::write_container(path, c);
}

History train_alternating(nn::GeneratorNet& gen, nn::DiscriminatorNet& disc,
                          const ScenarioSource& source,
                          const std::vector<LabelledSample>& prelabelled,
                          const TrainConfig& config, const PretrainResult& pretrain,
                          const std::optional<std::string>& checkpoint_dir) {
  config.validate();
  if (prelabelled.empty()) throw EmptyDataset("no prelabelled data");
  History h;
  h.stopping_loss_discriminator = config.stopping_loss_discriminator.value_or(
      config.stopping_factor_discriminator * pretrain.final_test_loss);
  if (config.stopping_loss_generator) {
    h.stopping_loss_generator = *config.stopping_loss_generator;
  } else {
    const TrainingSet pool = make_training_set(source.network(), disc.layout(), prelabelled);
    h.stopping_loss_generator =
        config.stopping_factor_generator * mean_prediction(disc, pool, config.batch_size);
  }
  log::info("stopping losses: generator {:.4f}, discriminator {:.4f}", h.stopping_loss_generator,
            h.stopping_loss_discriminator);
  if (checkpoint_dir) std::filesystem::create_directories(*checkpoint_dir);

  double temperature = 0.0;
  std::vector<LabelledSample> data;
  std::uint64_t generator_calls = 0;
  for (int epoch = 0; epoch < config.num_epochs; ++epoch) {
    AlternatingEpoch rec;
    for (int g = 0; g < config.num_generator_epochs; ++g) {
      temperature += 1.0;
      gen.set_temperature(temperature);
      const GeneratorEpoch ge = generator_training(gen, disc, source, config, generator_calls++);
      rec.generator.push_back(ge);
      log::info("epoch {} generator {}: T {} loss {:.4f}", epoch + 1, g + 1, temperature,
                ge.mean_loss);
      if (ge.mean_loss <= h.stopping_loss_generator) break;
    }

    FreshData fresh = prepare_discriminator_training_data(gen, source, data, config,
                                                          static_cast<std::uint64_t>(epoch));
    data = std::move(fresh.samples);
    rec.new_samples = fresh.generated;
    rec.failed_samples = fresh.failed;
    SplitMix64 mix_rng = SplitMix64::stream(config.seed, kStreamMix, static_cast<std::uint64_t>(epoch));
    Split split = split_data(mix_data(data, prelabelled, config.num_prelabelled, mix_rng),
                             config.ratio_test);
    rec.data_size = split.train.size() + split.test.size();
    if (split.train.empty() || split.test.empty())
      throw EmptyDataset("too few samples for a discriminator phase");
    const TrainingSet train = make_training_set(source.network(), disc.layout(), split.train);
    const TrainingSet test = make_training_set(source.network(), disc.layout(), split.test);

    nn::Adam opt(disc.params(), {.lr = config.lr, .weight_decay = config.weight_decay});
    ReduceLROnPlateau plateau(config.lr, config.plateau_patience, config.plateau_factor);
    for (int d = 0; d < config.num_discriminator_epochs; ++d) {
      SplitMix64 rng = SplitMix64::stream(config.seed, kStreamShuffle,
                                          (static_cast<std::uint64_t>(epoch + 1) << 32) | d);
      EpochLoss e;
      e.lr = opt.lr();
      e.train = discriminator_training_loop(disc, train, shuffled_indices(train.size(), rng),
                                            config.batch_size, opt, config.objective_scale);
      e.test = evaluate_l1(disc, test, config.batch_size, config.objective_scale);
      opt.set_lr(plateau.step(e.test));
      rec.discriminator.push_back(e);
      log::info("epoch {} discriminator {}: train {:.4f} test {:.4f}", epoch + 1, d + 1, e.train,
                e.test);
      if (e.test <= h.stopping_loss_discriminator) break;
    }
    h.epochs.push_back(std::move(rec));
    h.temperature = temperature;

    if (checkpoint_dir) {
      const std::filesystem::path dir(*checkpoint_dir);
      nn::save_networks((dir / "checkpoint.bin").string(), &gen, &disc);
      save_optimizer_state((dir / "optimizer.bin").string(), nullptr, &opt);
      write_text(dir / "history.json", h.to_json().dump(2) + "\n");
    }
  }
  return h;
}

}  // namespace gaswarm::train

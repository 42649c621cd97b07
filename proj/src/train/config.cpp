#include "gaswarm/train/config.hpp"

namespace gaswarm::train {

TrainConfig TrainConfig::paper() { return TrainConfig{}; }

TrainConfig TrainConfig::desk() {
  TrainConfig c;
  c.batch_size = 32;
  c.pretrain_epochs = 20;
  c.num_scenarios = 2000;
  c.cyclic_step_size_up = 63;
  c.num_data_new = 64;
  c.num_data_old = 256;
  c.num_prelabelled = 256;
  c.num_epochs = 3;
  c.num_generator_epochs = 10;
  c.num_discriminator_epochs = 25;
  return c;
}

TrainConfig TrainConfig::profile(const std::string& name) {
  if (name == "paper") return paper();
  if (name == "desk") return desk();
  throw TrainError("unknown training profile '" + name + "'");
}

void TrainConfig::validate() const {
  auto positive = [](int v, const char* what) {
    if (v < 1) throw TrainError(std::string(what) + " must be positive");
  };
  positive(batch_size, "batch_size");
  positive(num_scenarios, "num_scenarios");
  positive(cyclic_step_size_up, "step_size_up");
  positive(num_data_new, "num_data_new");
  positive(threads, "threads");
  if (pretrain_epochs < 0 || num_epochs < 0 || num_generator_epochs < 0 ||
      num_discriminator_epochs < 0 || num_data_old < 0 || num_prelabelled < 0)
    throw TrainError("epoch and sample counts must not be negative");
  if (!(ratio_test > 0.0 && ratio_test < 1.0)) throw TrainError("ratio_test must lie in (0, 1)");
  if (!(objective_scale > 0.0)) throw TrainError("objective scale must be positive");
  if (pretrain_lr < 0 || lr < 0 || cyclic_base_lr < 0 || cyclic_max_lr < cyclic_base_lr)
    throw TrainError("invalid learning rates");
  if (!(plateau_factor > 0.0 && plateau_factor < 1.0) || plateau_patience < 0)
    throw TrainError("invalid plateau schedule");
}

nlohmann::json TrainConfig::to_json() const {
  nlohmann::json j{{"batch_size", batch_size},
                   {"pretrain_epochs", pretrain_epochs},
                   {"pretrain_lr", pretrain_lr},
                   {"pretrain_weight_decay", pretrain_weight_decay},
                   {"max_lr", cyclic_max_lr},
                   {"base_lr", cyclic_base_lr},
                   {"step_size_up", cyclic_step_size_up},
                   {"num_scenarios", num_scenarios},
                   {"num_data_new", num_data_new},
                   {"num_data_old", num_data_old},
                   {"num_prelabelled", num_prelabelled},
                   {"ratio_test", ratio_test},
                   {"num_epochs", num_epochs},
                   {"num_generator_epochs", num_generator_epochs},
                   {"num_discriminator_epochs", num_discriminator_epochs},
                   {"learning_rate", lr},
                   {"weight_decay", weight_decay},
                   {"patience", plateau_patience},
                   {"factor", plateau_factor},
                   {"stopping_factor_discriminator", stopping_factor_discriminator},
                   {"stopping_factor_generator", stopping_factor_generator},
                   {"objective_scale", objective_scale},
                   {"seed", seed},
                   {"threads", threads}};
  j["stopping_loss_discriminator"] =
      stopping_loss_discriminator ? nlohmann::json(*stopping_loss_discriminator) : nlohmann::json(nullptr);
  j["stopping_loss_generator"] =
      stopping_loss_generator ? nlohmann::json(*stopping_loss_generator) : nlohmann::json(nullptr);
  return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j, const TrainConfig& base) {
  TrainConfig c = base;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("batch_size", c.batch_size);
  get("pretrain_epochs", c.pretrain_epochs);
  get("pretrain_lr", c.pretrain_lr);
  get("pretrain_weight_decay", c.pretrain_weight_decay);
  get("max_lr", c.cyclic_max_lr);
  get("base_lr", c.cyclic_base_lr);
  get("step_size_up", c.cyclic_step_size_up);
  get("num_scenarios", c.num_scenarios);
  get("num_data_new", c.num_data_new);
  get("num_data_old", c.num_data_old);
  get("num_prelabelled", c.num_prelabelled);
  get("ratio_test", c.ratio_test);
  get("num_epochs", c.num_epochs);
  get("num_generator_epochs", c.num_generator_epochs);
  get("num_discriminator_epochs", c.num_discriminator_epochs);
  get("learning_rate", c.lr);
  get("weight_decay", c.weight_decay);
  get("patience", c.plateau_patience);
  get("factor", c.plateau_factor);
  get("stopping_factor_discriminator", c.stopping_factor_discriminator);
  get("stopping_factor_generator", c.stopping_factor_generator);
  get("objective_scale", c.objective_scale);
  get("seed", c.seed);
  get("threads", c.threads);
  for (auto [key, field] : {std::pair{"stopping_loss_discriminator", &c.stopping_loss_discriminator},
                            std::pair{"stopping_loss_generator", &c.stopping_loss_generator}}) {
    if (!j.contains(key)) continue;
    if (j.at(key).is_null())
      field->reset();
    else
      *field = j.at(key).get<double>();
  }
  c.validate();
  return c;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) { return from_json(j, paper()); }

}  // namespace gaswarm::train

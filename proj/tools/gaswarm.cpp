#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaswarm/data/dataset.hpp"
#include "gaswarm/data/rng.hpp"
#include "gaswarm/log.hpp"
#include "gaswarm/nn/encoding.hpp"
#include "gaswarm/nn/weights.hpp"
#include "gaswarm/pipeline/pipeline.hpp"
#include "gaswarm/train/trainer.hpp"

using namespace gaswarm;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit : int { kOk = 0, kFailure = 1, kInfeasibleInput = 2, kTimeLimit = 3, kFormat = 4 };

struct CliError : std::runtime_error {
  CliError(int code, const std::string& what) : std::runtime_error(what), code(code) {}
  int code;
};

struct Globals {
  std::uint64_t seed = 1;
  std::string profile = "desk";
  std::string out;
  std::string log_level = "warn";
};

// Anything that goes wrong while reading an input file is a format error.
template <class Fn>
auto loading(const std::string& what, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const CliError&) {
    throw;
  } catch (const gas::GasError&) {
    throw;
  } catch (const std::exception& e) {
    throw CliError(kFormat, what + ": " + e.what());
  }
}

json read_json(const std::string& path) {
  return loading(path, [&] {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open");
    return json::parse(in);
  });
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw CliError(kFailure, "cannot write " + path.string());
}

std::string require_out(const Globals& g) {
  if (g.out.empty()) throw CliError(kFailure, "--out is required");
  return g.out;
}

gas::GasNetwork load_net(const std::string& path) {
  return loading(path, [&] { return gas::load_network(path); });
}

data::SamplerConfig load_sampler(const std::string& path, const gas::GasNetwork& net) {
  return loading(path, [&] { return data::load_sampler_config(path, net.name); });
}

std::vector<data::LabelledSample> load_samples(const gas::GasNetwork& net, const std::string& path) {
  return loading(path, [&] { return data::read_ndjson(net, path); });
}

nn::NetworkPair load_weights(const gas::GasNetwork& net, const std::string& path) {
  const nn::EncodingLayout layout = nn::make_layout(net);
  return loading(path, [&] { return nn::load_networks(path, &layout); });
}

// --set key=value; the value is read as JSON when it parses, else as a string.
json parse_overrides(const std::vector<std::string>& sets) {
  json j = json::object();
  for (const std::string& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw CliError(kFailure, "--set expects key=value: " + s);
    const std::string value = s.substr(eq + 1);
    j[s.substr(0, eq)] = json::parse(value, nullptr, false).is_discarded() ? json(value)
                                                                          : json::parse(value);
  }
  return j;
}

struct TrainOptions {
  std::string net, data, config;
  std::vector<std::string> sets;
};

train::TrainConfig train_config(const Globals& g, const TrainOptions& o, bool seed_given) {
  train::TrainConfig c = loading("training profile", [&] { return train::TrainConfig::profile(g.profile); });
  if (seed_given) c.seed = g.seed;
  if (!o.config.empty()) c = loading(o.config, [&] { return train::TrainConfig::from_json(read_json(o.config), c); });
  return loading("--set", [&] { return train::TrainConfig::from_json(parse_overrides(o.sets), c); });
}

std::uint64_t init_seed(std::uint64_t seed, std::uint64_t which) {
  return data::SplitMix64::stream(seed, 20, which).next_u64();
}

// ------------------------------------------------------------------ commands

void net_synth(const Globals& g, const std::string& templ) {
  const gas::GasNetwork net = loading("template", [&] { return gas::network_template(templ); });
  gas::save_network(net, require_out(g));
}

struct DataOptions {
  std::string net, sampler;
  int states = 100, scenarios = 2000, horizon = 8, distance = 8, threads = 1;
  double granularity = 1800.0, time_limit = 60.0;
};

void data_generate(const Globals& g, const DataOptions& o) {
  const gas::GasNetwork net = load_net(o.net);
  data::DatasetConfig c;
  c.num_states = o.states;
  c.num_scenarios = o.scenarios;
  c.time_step_difference = o.distance;
  c.seed = g.seed;
  c.threads = o.threads;
  c.generation.horizon = o.horizon;
  c.generation.granularity_s = o.granularity;
  c.generation.solve.time_limit_s = o.time_limit;
  const data::Dataset ds = data::generate_dataset(net, load_sampler(o.sampler, net), c);
  data::write_ndjson(net, ds.samples, require_out(g));
  for (const data::SampleFailure& f : ds.failures)
    log::warning("sample {} failed at {}: {}", f.index, f.stage, f.reason);
  std::printf("%zu samples, %zu failures\n", ds.samples.size(), ds.failures.size());
}

void train_pretrain(const Globals& g, const TrainOptions& o, bool seed_given) {
  const gas::GasNetwork net = load_net(o.net);
  const train::TrainConfig cfg = train_config(g, o, seed_given);
  const auto samples = load_samples(net, o.data);
  const nn::EncodingLayout layout = nn::make_layout(net);
  const nn::ArchConfig arch;
  nn::GeneratorNet gen(layout, arch, init_seed(cfg.seed, 0));
  nn::DiscriminatorNet disc(layout, arch, init_seed(cfg.seed, 1));
  const train::PretrainResult r = train::pretrain_discriminator(disc, net, samples, cfg);

  const fs::path out = require_out(g);
  fs::create_directories(out);
  nn::save_networks((out / "weights.bin").string(), &gen, &disc);
  write_text(out / "pretrain.json", r.to_json().dump(2) + "\n");
  write_text(out / "config.json", cfg.to_json().dump(2) + "\n");
  std::printf("test L1 %.6g -> %.6g, validation %.6g\n", r.initial_test_loss, r.final_test_loss,
              r.validation_loss);
}

void train_alternating(const Globals& g, const TrainOptions& o, bool seed_given,
                       const std::string& weights, std::string report, const std::string& sampler,
                       bool checkpoint) {
  const gas::GasNetwork net = load_net(o.net);
  const train::TrainConfig cfg = train_config(g, o, seed_given);
  const auto samples = load_samples(net, o.data);
  nn::NetworkPair nets = load_weights(net, weights);
  if (!nets.generator || !nets.discriminator)
    throw CliError(kFormat, weights + ": needs both networks");
  if (report.empty()) report = (fs::path(weights).parent_path() / "pretrain.json").string();
  const train::PretrainResult pre =
      loading(report, [&] { return train::PretrainResult::from_json(read_json(report)); });

  const fs::path out = require_out(g);
  fs::create_directories(out);
  const train::ScenarioSource source(net, load_sampler(sampler, net), data::GenerationConfig{},
                                     samples);
  const train::History h =
      train::train_alternating(*nets.generator, *nets.discriminator, source, samples, cfg, pre,
                               checkpoint ? std::optional<std::string>((out / "checkpoint").string())
                                          : std::nullopt);
  nn::save_networks((out / "weights.bin").string(), nets.generator.get(), nets.discriminator.get());
  write_text(out / "history.json", h.to_json().dump(2) + "\n");
  write_text(out / "config.json", cfg.to_json().dump(2) + "\n");
  std::printf("%zu epochs, temperature %g\n", h.epochs.size(), h.temperature);
}

struct SolveCliOptions {
  std::string net, weights, clock = "wall";
  double time_limit = 3600.0;
  int threads = 1;
};

pipeline::SolveOptions solve_options(const SolveCliOptions& o) {
  pipeline::SolveOptions s;
  s.params.time_limit_s = o.time_limit;
  s.clock = loading("--clock", [&] { return pipeline::clock_from_string(o.clock); });
  return s;
}

gas::Instance load_instance(const gas::GasNetwork& net, const std::string& path, std::size_t index) {
  if (fs::path(path).extension() == ".json")
    return loading(path, [&] { return gas::instance_from_json(net, read_json(path)); });
  auto all = loading(path, [&] { return pipeline::load_instances(net, path); });
  if (index >= all.size()) throw CliError(kFailure, "--index beyond the instance count");
  return all[index].instance;
}

json solution_json(const milp::ParametricMilp& model, const milp::MilpResult& r) {
  json values = json::object();
  for (std::size_t j = 0; j < r.point.size(); ++j) values[model.variable(static_cast<int>(j)).id] = r.point[j];
  return {{"status", milp::to_string(r.status)},
          {"objective", r.has_solution() ? json(r.objective) : json(nullptr)},
          {"nodes", r.node_count},
          {"hit_time_limit", r.hit_time_limit},
          {"values", values}};
}

int solve(const Globals& g, const SolveCliOptions& o, const std::string& instance_path,
          std::size_t index, const std::string& mode) {
  const gas::GasNetwork net = load_net(o.net);
  const gas::Instance inst = load_instance(net, instance_path, index);
  gas::validate_instance(net, inst);
  const pipeline::SolveOptions opts = solve_options(o);
  const milp::ParametricMilp model = gas::build_instance_milp(net, inst, opts.weights);

  json out;
  milp::MilpResult result;
  if (mode == "cold") {
    const pipeline::ColdResult c = pipeline::cold_solve(net, inst, opts);
    result = c.result;
    out = solution_json(model, result);
    out["time"] = c.time;
  } else {
    if (o.weights.empty()) throw CliError(kFailure, "--weights is required for mode " + mode);
    nn::NetworkPair nets = load_weights(net, o.weights);
    if (!nets.generator) throw CliError(kFormat, o.weights + ": no generator");
    if (mode == "heuristic") {
      const pipeline::HeuristicResult h = pipeline::primal_heuristic(net, inst, model, *nets.generator, opts);
      result = h.result;
      out = solution_json(model, result);
      out["valid_on_unfixed"] = h.has_solution() && h.validation.feasible();
      out["time"] = h.solve_time;
      out["infer_time"] = h.infer_time;
      out["modes"] = h.z1;
    } else {
      const pipeline::WarmStartResult w = pipeline::warm_start_solve(net, inst, *nets.generator, opts);
      result = w.warm;
      out = solution_json(model, result);
      out["accepted"] = w.accepted();
      out["heuristic_objective"] = w.heuristic.has_solution() ? json(w.heuristic.objective()) : json(nullptr);
      out["time"] = w.warm_time;
      out["heuristic_time"] = w.heuristic.solve_time;
      out["infer_time"] = w.heuristic.infer_time;
    }
  }
  out["mode"] = mode;
  out["clock"] = o.clock;
  if (g.out.empty())
    std::cout << out.dump(2) << '\n';
  else
    write_text(g.out, out.dump(2) + "\n");

  if (result.hit_time_limit) return kTimeLimit;
  if (!result.has_solution()) return kInfeasibleInput;
  return kOk;
}

void evaluate(const Globals& g, const SolveCliOptions& o, const std::string& instances) {
  const gas::GasNetwork net = load_net(o.net);
  const auto insts = loading(instances, [&] { return pipeline::load_instances(net, instances); });
  if (insts.empty()) throw CliError(kInfeasibleInput, "no instances in " + instances);
  nn::NetworkPair nets = load_weights(net, o.weights);
  if (!nets.generator) throw CliError(kFormat, o.weights + ": no generator");
  const pipeline::SolveOptions opts = solve_options(o);
  const pipeline::SuiteReport rep = pipeline::evaluate_suite(net, insts, *nets.generator, opts, o.threads);
  json config = opts.to_json();
  config["network"] = net.name;
  config["instances"] = fs::path(instances).filename().string();
  config["weights"] = fs::path(o.weights).filename().string();
  config["threads"] = o.threads;
  pipeline::write_report(rep, config, require_out(g));
  const pipeline::SuiteSummary& s = rep.summary;
  std::printf("%zu instances, %zu failed, acceptance %.3f, speedup %.3f\n", s.instances, s.failures,
              s.acceptance_rate, s.speedup);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learned warm starts for transient gas network MILPs"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--profile", g.profile, "Training profile: paper or desk")
      ->check(CLI::IsMember({"paper", "desk"}));
  app.add_option("--out", g.out, "Output file or directory");
  app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error or off");

  std::string templ = "toy";
  auto* net_cmd = app.add_subcommand("net", "Network files")->require_subcommand(1);
  auto* synth = net_cmd->add_subcommand("synth", "Write a built-in network template");
  synth->add_option("--template", templ)->check(CLI::IsMember({"toy", "station_d"}));

  DataOptions dopt;
  dopt.sampler = GASWARM_DATA_DIR "/sampler_defaults.json";
  auto* data_cmd = app.add_subcommand("data", "Labelled data")->require_subcommand(1);
  auto* generate = data_cmd->add_subcommand("generate", "Generate a labelled dataset (NDJSON)");
  generate->add_option("--net", dopt.net)->required()->check(CLI::ExistingFile);
  generate->add_option("--sampler", dopt.sampler, "Sampler defaults file")->capture_default_str();
  generate->add_option("--states", dopt.states)->capture_default_str();
  generate->add_option("--scenarios", dopt.scenarios)->capture_default_str();
  generate->add_option("--horizon", dopt.horizon)->capture_default_str();
  generate->add_option("--distance", dopt.distance, "Steps between seed and initial state")
      ->capture_default_str();
  generate->add_option("--granularity", dopt.granularity, "Seconds per step")->capture_default_str();
  generate->add_option("--time-limit", dopt.time_limit)->capture_default_str();
  generate->add_option("--threads", dopt.threads)->capture_default_str();

  TrainOptions topt;
  std::string weights, report, tsampler = dopt.sampler;
  bool checkpoint = false;
  auto* train_cmd = app.add_subcommand("train", "Network training")->require_subcommand(1);
  auto* pretrain = train_cmd->add_subcommand("pretrain", "Pretrain the discriminator");
  auto* alternating = train_cmd->add_subcommand("alternating", "Alternate generator and discriminator");
  for (CLI::App* c : {pretrain, alternating}) {
    c->add_option("--net", topt.net)->required()->check(CLI::ExistingFile);
    c->add_option("--data", topt.data, "Labelled NDJSON")->required()->check(CLI::ExistingFile);
    c->add_option("--config", topt.config, "JSON file of training parameters");
    c->add_option("--set", topt.sets, "key=value training parameter");
  }
  alternating->add_option("--weights", weights, "Pretrained weights")->required()->check(CLI::ExistingFile);
  alternating->add_option("--pretrain-report", report, "Defaults to pretrain.json beside the weights");
  alternating->add_option("--sampler", tsampler)->capture_default_str();
  alternating->add_flag("--checkpoint", checkpoint, "Checkpoint after every outer epoch");

  SolveCliOptions sopt;
  std::string instance, mode = "warmstart";
  std::size_t index = 0;
  auto* solve_cmd = app.add_subcommand("solve", "Solve one instance");
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate warm start against cold solves");
  for (CLI::App* c : {solve_cmd, eval_cmd}) {
    c->add_option("--net", sopt.net)->required()->check(CLI::ExistingFile);
    c->add_option("--time-limit", sopt.time_limit)->capture_default_str();
    c->add_option("--clock", sopt.clock)->check(CLI::IsMember({"wall", "ticks"}))->capture_default_str();
  }
  solve_cmd->add_option("--instance", instance, "Instance JSON or labelled NDJSON")->required();
  solve_cmd->add_option("--index", index, "Line of an NDJSON file");
  solve_cmd->add_option("--mode", mode)->check(CLI::IsMember({"cold", "heuristic", "warmstart"}))
      ->capture_default_str();
  solve_cmd->add_option("--weights", sopt.weights);
  std::string instances;
  eval_cmd->add_option("--instances", instances, "Directory of instance JSON or labelled NDJSON")
      ->required();
  eval_cmd->add_option("--weights", sopt.weights)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--threads", sopt.threads)->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  log::set_level(spdlog::level::from_str(g.log_level));
  const bool seed_given = seed_opt->count() > 0;

  try {
    if (synth->parsed()) net_synth(g, templ);
    if (generate->parsed()) data_generate(g, dopt);
    if (pretrain->parsed()) train_pretrain(g, topt, seed_given);
    if (alternating->parsed())
      train_alternating(g, topt, seed_given, weights, report, tsampler, checkpoint);
    if (solve_cmd->parsed()) return solve(g, sopt, instance, index, mode);
    if (eval_cmd->parsed()) evaluate(g, sopt, instances);
  } catch (const CliError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code;
  } catch (const gas::GasError& e) {
    std::fprintf(stderr, "infeasible input: %s\n", e.what());
    return kInfeasibleInput;
  } catch (const nn::FormatError& e) {
    std::fprintf(stderr, "format error: %s\n", e.what());
    return kFormat;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "format error: %s\n", e.what());
    return kFormat;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
  return kOk;
}

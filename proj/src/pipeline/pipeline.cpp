#include "gaswarm/pipeline/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <fmt/format.h>

#include "gaswarm/data/dataset.hpp"
#include "gaswarm/log.hpp"
#include "gaswarm/nn/ops.hpp"
#include "gaswarm/parallel.hpp"

namespace gaswarm::pipeline {

namespace fs = std::filesystem;

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  [[nodiscard]] double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

double elapsed(const Stopwatch& w, std::int64_t pivots, Clock clock) {
  return clock == Clock::Wall ? w.seconds() : static_cast<double>(pivots);
}

std::string number(double v) { return fmt::format("{}", v); }

}  // namespace

Clock clock_from_string(const std::string& s) {
  if (s == "wall") return Clock::Wall;
  if (s == "ticks") return Clock::Ticks;
  throw PipelineError("unknown clock '" + s + "' (wall or ticks)");
}

const char* to_string(Clock c) { return c == Clock::Wall ? "wall" : "ticks"; }

nlohmann::json SolveOptions::to_json() const {
  return {{"weights",
           {{"pressure_slack", weights.pressure_slack},
            {"flow_slack", weights.flow_slack},
            {"mode_change", weights.mode_change},
            {"operating_point_change", weights.operating_point_change}}},
          {"time_limit_s", params.time_limit_s},
          {"feasibility_tol", params.feasibility_tol},
          {"mip_gap_rel", params.mip_gap_rel},
          {"mip_gap_abs", params.mip_gap_abs},
          {"validation_tol", validation_tol},
          {"clock", pipeline::to_string(clock)}};
}

gas::ModeSequence predict_modes(const gas::GasNetwork& net, const gas::Instance& inst,
                                const nn::GeneratorNet& gen, double* seconds) {
  Stopwatch w;
  const nn::Tensor probs = gen.forward(nn::encode(net, gen.layout(), {&inst}));
  gas::ModeSequence z1 = nn::argmax_channels(probs, 0);
  if (seconds) *seconds = w.seconds();
  return z1;
}

HeuristicResult primal_heuristic(const gas::GasNetwork& net, const gas::Instance& inst,
                                 const milp::ParametricMilp& model, const nn::GeneratorNet& gen,
                                 const SolveOptions& options) {
  HeuristicResult h;
  double infer_s = 0.0;
  h.z1 = predict_modes(net, inst, gen, &infer_s);
  h.infer_time = options.clock == Clock::Wall ? infer_s : 0.0;

  Stopwatch w;
  const milp::ParametricMilp fixed = milp::fix_binaries(model, gas::mode_assignment(net, h.z1));
  h.result = milp::solve_milp(fixed, options.params);
  h.solve_time = elapsed(w, h.result.pivots, options.clock);
  if (h.result.hit_time_limit && h.result.status == milp::SolveStatus::Optimal)
    h.result.status = milp::SolveStatus::Feasible;
  if (h.has_solution())
    h.validation = milp::validate_solution(model, h.result.point, options.validation_tol);
  return h;
}

HeuristicResult primal_heuristic(const gas::GasNetwork& net, const gas::Instance& inst,
                                 const nn::GeneratorNet& gen, const SolveOptions& options) {
  return primal_heuristic(net, inst, gas::build_instance_milp(net, inst, options.weights), gen,
                          options);
}

std::map<std::string, double> partial_solution(const gas::GasNetwork& net,
                                               const milp::ParametricMilp& model,
                                               const std::vector<double>& point, int horizon) {
  std::map<std::string, double> out;
  for (int j : model.block_members(milp::Block::Decision))
    out[model.variable(j).id] = std::round(point.at(j));
  for (int t = 1; t <= horizon; ++t) {
    for (int g = 0; g < net.num_groups; ++g) {
      const std::string id = gas::ids::direction(g, t);
      if (auto j = model.find(id)) out[id] = std::round(point.at(*j));
    }
    // t = 0 is part of the instance, so only future steps are passed on
    for (int v : net.boundary_nodes()) {
      const std::string id = gas::ids::pressure(net, v, t);
      out[id] = point.at(model.index(id));
    }
  }
  return out;
}

std::optional<std::vector<double>> complete_hint(const milp::ParametricMilp& model,
                                                 const std::map<std::string, double>& partial,
                                                 const milp::SolveParams& params,
                                                 std::int64_t* pivots) {
  milp::ParametricMilp restricted = model;
  for (const auto& [id, value] : partial) {
    const int j = model.index(id);
    const milp::VariableDef& var = model.variable(j);
    const double v = std::clamp(value, var.lower, var.upper);
    restricted.set_bounds(j, v, v);
  }
  const milp::MilpResult r = milp::solve_milp(restricted, params);
  if (pivots) *pivots = r.pivots;
  if (!r.has_solution()) return std::nullopt;
  return r.point;
}

WarmStartResult warm_start_solve(const gas::GasNetwork& net, const gas::Instance& inst,
                                 const nn::GeneratorNet& gen, const SolveOptions& options) {
  const milp::ParametricMilp model = gas::build_instance_milp(net, inst, options.weights);
  WarmStartResult out;
  out.heuristic = primal_heuristic(net, inst, model, gen, options);

  std::optional<std::vector<double>> hint;
  if (out.heuristic.has_solution()) {
    Stopwatch w;
    std::int64_t pivots = 0;
    hint = complete_hint(model,
                         partial_solution(net, model, out.heuristic.result.point, inst.horizon),
                         options.params, &pivots);
    out.completion_time = elapsed(w, pivots, options.clock);
    if (!hint) log::warning("partial solution could not be completed; solving without a hint");
  }
  out.hint_built = hint.has_value();

  Stopwatch w;
  out.warm = milp::solve_milp(model, options.params, hint);
  out.warm_time = out.completion_time + elapsed(w, out.warm.pivots, options.clock);
  return out;
}

ColdResult cold_solve(const gas::GasNetwork& net, const gas::Instance& inst,
                      const SolveOptions& options) {
  const milp::ParametricMilp model = gas::build_instance_milp(net, inst, options.weights);
  ColdResult out;
  Stopwatch w;
  out.result = milp::solve_milp(model, options.params);
  out.time = elapsed(w, out.result.pivots, options.clock);
  return out;
}

nlohmann::json EvalRecord::to_json() const {
  nlohmann::json j{{"instance_id", instance_id},
                   {"f_heuristic", f_heuristic},
                   {"f_cold", f_cold},
                   {"f_warm", f_warm},
                   {"t_infer_s", t_infer},
                   {"t_heuristic_s", t_heuristic},
                   {"t_warm_s", t_warm},
                   {"t_cold_s", t_cold},
                   {"nodes_warm", nodes_warm},
                   {"nodes_cold", nodes_cold},
                   {"accepted", accepted},
                   {"heuristic_valid", heuristic_valid}};
  // JSON has no infinity
  for (const char* key : {"f_heuristic", "f_cold", "f_warm"})
    if (!std::isfinite(j[key].get<double>())) j[key] = nullptr;
  if (failed()) j["error"] = error;
  return j;
}

EvalRecord evaluate_instance(const gas::GasNetwork& net, const std::string& id,
                             const gas::Instance& inst, const nn::GeneratorNet& gen,
                             const SolveOptions& options) {
  EvalRecord r;
  r.instance_id = id;
  const WarmStartResult warm = warm_start_solve(net, inst, gen, options);
  r.t_infer = warm.heuristic.infer_time;
  r.t_heuristic = warm.heuristic.solve_time;
  r.t_warm = warm.warm_time;
  if (warm.heuristic.has_solution()) {
    r.f_heuristic = warm.heuristic.objective();
    r.heuristic_valid = warm.heuristic.validation.feasible();
  }
  if (warm.warm.has_solution()) r.f_warm = warm.warm.objective;
  r.nodes_warm = warm.warm.node_count;
  r.accepted = warm.accepted();

  const ColdResult cold = cold_solve(net, inst, options);
  r.t_cold = cold.time;
  r.nodes_cold = cold.result.node_count;
  if (cold.result.has_solution()) r.f_cold = cold.result.objective;

  if (!warm.heuristic.has_solution())
    r.error = "heuristic found no solution";
  else if (!cold.result.has_solution() || !warm.warm.has_solution())
    r.error = std::string("solver ended ") + milp::to_string(cold.result.status);
  return r;
}

double shifted_geometric_mean(const std::vector<double>& values, double shift) {
  if (values.empty()) throw PipelineError("shifted geometric mean of no values");
  double log_sum = 0.0;
  for (double v : values) {
    if (!(v + shift > 0.0)) throw PipelineError("shifted value must be positive");
    log_sum += std::log(v + shift);
  }
  return std::exp(log_sum / static_cast<double>(values.size())) - shift;
}

nlohmann::json SuiteSummary::to_json() const {
  return {{"instances", instances},
          {"failures", failures},
          {"acceptance_rate", acceptance_rate},
          {"sgm_cold", sgm_cold},
          {"sgm_warm", sgm_warm},
          {"sgm_heuristic", sgm_heuristic},
          {"speedup", speedup},
          {"heuristic_optimal_rate", heuristic_optimal_rate},
          {"gap", {{"min", gap_min}, {"median", gap_median}, {"mean", gap_mean}, {"max", gap_max}}}};
}

SuiteSummary summarize(const std::vector<EvalRecord>& records, double mip_gap_abs) {
  SuiteSummary s;
  s.instances = records.size();
  std::vector<double> cold, warm, heur, gaps;
  std::size_t accepted = 0;
  for (const EvalRecord& r : records) {
    if (r.failed()) {
      ++s.failures;
      continue;
    }
    cold.push_back(r.t_cold);
    warm.push_back(r.warm_total());
    heur.push_back(r.t_infer + r.t_heuristic);
    gaps.push_back(r.f_heuristic - r.f_cold);
    accepted += r.accepted ? 1 : 0;
  }
  if (gaps.empty()) return s;
  const auto n = static_cast<double>(gaps.size());
  s.acceptance_rate = static_cast<double>(accepted) / n;
  s.sgm_cold = shifted_geometric_mean(cold);
  s.sgm_warm = shifted_geometric_mean(warm);
  s.sgm_heuristic = shifted_geometric_mean(heur);
  s.speedup = s.sgm_cold > 0.0 ? 1.0 - s.sgm_warm / s.sgm_cold : 0.0;
  s.heuristic_optimal_rate =
      static_cast<double>(std::count_if(gaps.begin(), gaps.end(),
                                        [&](double g) { return g <= mip_gap_abs; })) /
      n;
  std::sort(gaps.begin(), gaps.end());
  s.gap_min = gaps.front();
  s.gap_max = gaps.back();
  const std::size_t m = gaps.size() / 2;
  s.gap_median = gaps.size() % 2 ? gaps[m] : 0.5 * (gaps[m - 1] + gaps[m]);
  s.gap_mean = std::accumulate(gaps.begin(), gaps.end(), 0.0) / n;
  return s;
}

std::vector<NamedInstance> load_instances(const gas::GasNetwork& net, const std::string& path) {
  std::vector<NamedInstance> out;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path))
      if (entry.is_regular_file() && entry.path().extension() == ".json")
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files) {
      std::ifstream in(f);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw PipelineError(f.string() + ": " + e.what());
      }
      out.push_back({f.stem().string(), gas::instance_from_json(net, j)});
    }
  } else if (fs::is_regular_file(path)) {
    for (data::LabelledSample& s : data::read_ndjson(net, path))
      out.push_back({std::to_string(s.sample_index), std::move(s.pi)});
  } else {
    throw PipelineError("no instances at " + path);
  }
  return out;
}

SuiteReport evaluate_suite(const gas::GasNetwork& net, const std::vector<NamedInstance>& instances,
                           const nn::GeneratorNet& gen, const SolveOptions& options, int threads) {
  if (instances.empty()) throw PipelineError("evaluation needs at least one instance");
  SuiteReport report;
  report.records.resize(instances.size());
  parallel_for(instances.size(), threads, [&](std::size_t i) {
    try {
      report.records[i] =
          evaluate_instance(net, instances[i].id, instances[i].instance, gen, options);
    } catch (const std::exception& e) {
      EvalRecord r;
      r.instance_id = instances[i].id;
      r.error = e.what();
      report.records[i] = std::move(r);
    }
    if (report.records[i].failed())
      log::warning("instance {} failed: {}", instances[i].id, report.records[i].error);
  });
  report.summary = summarize(report.records, options.params.mip_gap_abs);
  return report;
}

std::string to_csv(const std::vector<EvalRecord>& records) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const EvalRecord& r : records)
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.instance_id, number(r.f_heuristic),
                       number(r.f_cold), number(r.t_infer), number(r.t_heuristic),
                       number(r.t_warm), number(r.t_cold), r.nodes_warm, r.nodes_cold,
                       r.accepted ? 1 : 0);
  return out;
}

nlohmann::json to_json(const SuiteReport& report, const nlohmann::json& config) {
  nlohmann::json records = nlohmann::json::array();
  for (const EvalRecord& r : report.records) records.push_back(r.to_json());
  return {{"config", config}, {"summary", report.summary.to_json()}, {"records", records}};
}

void write_report(const SuiteReport& report, const nlohmann::json& config, const std::string& dir) {
  fs::create_directories(dir);
  std::ofstream csv(fs::path(dir) / "report.csv", std::ios::binary);
  csv << to_csv(report.records);
  std::ofstream js(fs::path(dir) / "report.json", std::ios::binary);
  js << to_json(report, config).dump(2) << '\n';
  if (!csv || !js) throw PipelineError("cannot write report to " + dir);
}

}  // namespace gaswarm::pipeline

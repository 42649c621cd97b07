#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gaswarm/gas/model.hpp"
#include "gaswarm/milp/model.hpp"
#include "gaswarm/nn/networks.hpp"

namespace gaswarm::pipeline {

class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Wall: seconds of a monotonic clock around each solver call.
/// Ticks: simplex pivots in place of seconds, so reports are reproducible.
enum class Clock : std::uint8_t { Wall, Ticks };

[[nodiscard]] Clock clock_from_string(const std::string& s);
[[nodiscard]] const char* to_string(Clock c);

struct SolveOptions {
  gas::ObjectiveWeights weights;
  milp::SolveParams params{3600.0, 1e-6, 1e-4, 1e-2};
  /// Tolerance for validating the heuristic point on the unfixed model.
  double validation_tol = 1e-6;
  Clock clock = Clock::Wall;

  [[nodiscard]] nlohmann::json to_json() const;
};

/// Generator argmax for one instance; `seconds` receives the forward time.
[[nodiscard]] gas::ModeSequence predict_modes(const gas::GasNetwork& net,
                                              const gas::Instance& inst,
                                              const nn::GeneratorNet& gen,
                                              double* seconds = nullptr);

struct HeuristicResult {
  gas::ModeSequence z1;
  milp::MilpResult result;  // point indexed like the unfixed model
  milp::ValidationReport validation;
  double infer_time = 0.0;
  double solve_time = 0.0;  // in the units of SolveOptions::clock

  [[nodiscard]] bool has_solution() const { return result.has_solution(); }
  [[nodiscard]] bool optimal() const { return result.status == milp::SolveStatus::Optimal; }
  [[nodiscard]] double objective() const { return result.objective; }
};

/// Fixes the generator's modes in `model` (the unfixed instance model) and
/// solves the restriction. A time limit returns the best incumbent with
/// status Feasible.
[[nodiscard]] HeuristicResult primal_heuristic(const gas::GasNetwork& net,
                                               const gas::Instance& inst,
                                               const milp::ParametricMilp& model,
                                               const nn::GeneratorNet& gen,
                                               const SolveOptions& options);
[[nodiscard]] HeuristicResult primal_heuristic(const gas::GasNetwork& net,
                                               const gas::Instance& inst,
                                               const nn::GeneratorNet& gen,
                                               const SolveOptions& options);

/// Values handed to the solver: the modes, the fence group directions and
/// the boundary pressures of steps 1..k, keyed by variable id.
[[nodiscard]] std::map<std::string, double> partial_solution(const gas::GasNetwork& net,
                                                             const milp::ParametricMilp& model,
                                                             const std::vector<double>& point,
                                                             int horizon);

/// Completes a partial solution to a full point by fixing its variables in
/// `model` and solving the rest. Empty when the completion has no solution.
[[nodiscard]] std::optional<std::vector<double>> complete_hint(
    const milp::ParametricMilp& model, const std::map<std::string, double>& partial,
    const milp::SolveParams& params, std::int64_t* pivots = nullptr);

struct WarmStartResult {
  HeuristicResult heuristic;
  bool hint_built = false;
  milp::MilpResult warm;
  double completion_time = 0.0;
  double warm_time = 0.0;  // completion plus the hinted solve

  [[nodiscard]] bool accepted() const { return warm.hint == milp::HintStatus::Accepted; }
};

/// Heuristic, partial solution, completion, then branch and bound on the
/// unfixed model with the completed point as the first incumbent. Without a
/// usable hint the solve runs cold.
[[nodiscard]] WarmStartResult warm_start_solve(const gas::GasNetwork& net,
                                               const gas::Instance& inst,
                                               const nn::GeneratorNet& gen,
                                               const SolveOptions& options);

struct ColdResult {
  milp::MilpResult result;
  double time = 0.0;
};
[[nodiscard]] ColdResult cold_solve(const gas::GasNetwork& net, const gas::Instance& inst,
                                    const SolveOptions& options);

struct EvalRecord {
  std::string instance_id;
  double f_heuristic = milp::kInf;
  double f_cold = milp::kInf;
  double f_warm = milp::kInf;
  double t_infer = 0.0;
  double t_heuristic = 0.0;
  double t_warm = 0.0;
  double t_cold = 0.0;
  std::int64_t nodes_warm = 0;
  std::int64_t nodes_cold = 0;
  bool accepted = false;
  bool heuristic_valid = false;  // validates on the unfixed model
  std::string error;             // non-empty when the instance failed

  [[nodiscard]] bool failed() const { return !error.empty(); }
  /// Generator, heuristic and hinted solve together.
  [[nodiscard]] double warm_total() const { return t_infer + t_heuristic + t_warm; }
  [[nodiscard]] nlohmann::json to_json() const;
};

/// Warm start followed by a separate cold solve of the same model.
[[nodiscard]] EvalRecord evaluate_instance(const gas::GasNetwork& net, const std::string& id,
                                           const gas::Instance& inst, const nn::GeneratorNet& gen,
                                           const SolveOptions& options);

/// (prod (v_i + shift))^(1/n) - shift, computed through logarithms.
/// Throws PipelineError on an empty input or v_i + shift <= 0.
[[nodiscard]] double shifted_geometric_mean(const std::vector<double>& values, double shift = 1.0);

struct SuiteSummary {
  std::size_t instances = 0;
  std::size_t failures = 0;
  double acceptance_rate = 0.0;
  double sgm_cold = 0.0;
  double sgm_warm = 0.0;  // over warm_total
  double sgm_heuristic = 0.0;
  double speedup = 0.0;   // 1 - sgm_warm / sgm_cold
  double heuristic_optimal_rate = 0.0;  // gap within mip_gap_abs
  double gap_min = 0.0, gap_median = 0.0, gap_mean = 0.0, gap_max = 0.0;

  [[nodiscard]] nlohmann::json to_json() const;
};

/// Aggregates over the records that did not fail.
[[nodiscard]] SuiteSummary summarize(const std::vector<EvalRecord>& records, double mip_gap_abs);

struct NamedInstance {
  std::string id;
  gas::Instance instance;
};

/// Every *.json file of a directory (id = file stem, sorted by file name) or
/// every line of an NDJSON dataset (id = sample index, file order).
[[nodiscard]] std::vector<NamedInstance> load_instances(const gas::GasNetwork& net,
                                                        const std::string& path);

struct SuiteReport {
  std::vector<EvalRecord> records;  // ordered by instance id
  SuiteSummary summary;
};

/// Evaluates all instances on `threads` workers. A failing instance is
/// recorded and the suite continues. Throws PipelineError without instances.
[[nodiscard]] SuiteReport evaluate_suite(const gas::GasNetwork& net,
                                         const std::vector<NamedInstance>& instances,
                                         const nn::GeneratorNet& gen,
                                         const SolveOptions& options, int threads = 1);

inline constexpr const char* kCsvHeader =
    "instance_id,f_heuristic,f_cold,t_infer_s,t_heuristic_s,t_warm_s,t_cold_s,nodes_warm,"
    "nodes_cold,accepted";

[[nodiscard]] std::string to_csv(const std::vector<EvalRecord>& records);
[[nodiscard]] nlohmann::json to_json(const SuiteReport& report, const nlohmann::json& config);
/// Writes report.csv and report.json into `dir`.
void write_report(const SuiteReport& report, const nlohmann::json& config, const std::string& dir);

}  // namespace gaswarm::pipeline

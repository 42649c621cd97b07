#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gaswarm/data/dataset.hpp"
#include "gaswarm/nn/encoding.hpp"
#include "gaswarm/nn/ops.hpp"
#include "gaswarm/pipeline/pipeline.hpp"
#include "support/instances.hpp"
#include "support/log_capture.hpp"

using namespace gaswarm;
using pipeline::EvalRecord;

namespace fs = std::filesystem;

namespace {

nn::ArchConfig small_arch() {
  nn::ArchConfig a;
  a.channels = 8;
  a.generator_blocks = 1;
  a.discriminator_blocks = 1;
  return a;
}

struct Toy {
  gas::GasNetwork net = gas::toy_station();
  nn::GeneratorNet gen{nn::make_layout(net), small_arch(), 21};
};

pipeline::SolveOptions ticks() {
  pipeline::SolveOptions o;
  o.clock = pipeline::Clock::Ticks;
  return o;
}

double tolerance(double obj) { return std::max(1e-2, 1e-4 * std::abs(obj)); }

EvalRecord record(const std::string& id, double t_warm, double t_cold) {
  EvalRecord r;
  r.instance_id = id;
  r.t_warm = t_warm;
  r.t_cold = t_cold;
  r.f_heuristic = 10.0;
  r.f_cold = 10.0;
  return r;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

// -------------------------------------------------------------- aggregates

TEST(ShiftedGeometricMean, SpotValue) {
  EXPECT_NEAR(pipeline::shifted_geometric_mean({1.0, 9.0}, 1.0), std::sqrt(2.0 * 10.0) - 1.0,
              1e-12);
}

TEST(ShiftedGeometricMean, ConstantValuesAndShiftZero) {
  EXPECT_NEAR(pipeline::shifted_geometric_mean({3.5, 3.5, 3.5}), 3.5, 1e-12);
  EXPECT_NEAR(pipeline::shifted_geometric_mean({2.0, 8.0}, 0.0), 4.0, 1e-12);
}

TEST(ShiftedGeometricMean, RejectsEmptyAndNonpositive) {
  EXPECT_THROW((void)pipeline::shifted_geometric_mean({}), pipeline::PipelineError);
  EXPECT_THROW((void)pipeline::shifted_geometric_mean({-1.0}, 1.0), pipeline::PipelineError);
}

TEST(Summary, EqualTimesGiveNoSpeedup) {
  const std::vector<EvalRecord> rs = {record("a", 4.0, 4.0), record("b", 4.0, 4.0)};
  const pipeline::SuiteSummary s = pipeline::summarize(rs, 1e-2);
  EXPECT_NEAR(s.speedup, 0.0, 1e-12);
  EXPECT_NEAR(s.sgm_cold, 4.0, 1e-12);
}

TEST(Summary, SingleInstanceEqualsItsValues) {
  EvalRecord r = record("only", 2.0, 5.0);
  r.t_infer = 0.5;
  r.t_heuristic = 1.0;
  r.f_heuristic = 12.0;
  r.accepted = true;
  const pipeline::SuiteSummary s = pipeline::summarize({r}, 1e-2);
  EXPECT_EQ(s.instances, 1u);
  EXPECT_NEAR(s.sgm_cold, 5.0, 1e-12);
  EXPECT_NEAR(s.sgm_warm, 3.5, 1e-12);
  EXPECT_NEAR(s.sgm_heuristic, 1.5, 1e-12);
  EXPECT_NEAR(s.speedup, 1.0 - 3.5 / 5.0, 1e-12);
  EXPECT_EQ(s.acceptance_rate, 1.0);
  EXPECT_NEAR(s.gap_min, 2.0, 1e-12);
  EXPECT_NEAR(s.gap_median, 2.0, 1e-12);
  EXPECT_NEAR(s.gap_max, 2.0, 1e-12);
  EXPECT_EQ(s.heuristic_optimal_rate, 0.0);
}

TEST(Summary, FailedRecordsAreCountedButNotAveraged) {
  EvalRecord bad = record("x", 100.0, 1.0);
  bad.error = "boom";
  const pipeline::SuiteSummary s = pipeline::summarize({record("a", 1.0, 3.0), bad}, 1e-2);
  EXPECT_EQ(s.failures, 1u);
  EXPECT_NEAR(s.sgm_warm, 1.0, 1e-12);
  EXPECT_EQ(s.heuristic_optimal_rate, 1.0);
}

TEST(Clock, Names) {
  EXPECT_EQ(pipeline::clock_from_string("ticks"), pipeline::Clock::Ticks);
  EXPECT_STREQ(pipeline::to_string(pipeline::clock_from_string("wall")), "wall");
  EXPECT_THROW((void)pipeline::clock_from_string("cpu"), pipeline::PipelineError);
}

// --------------------------------------------------------------- heuristic

TEST(PrimalHeuristic, ValidatesOnUnfixedModelAndBoundsTheOptimum) {
  Toy toy;
  milp::SolveParams exact;
  exact.mip_gap_abs = 1e-7;
  exact.mip_gap_rel = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const gas::Instance inst = support::random_instance(toy.net, 2, 300 + seed);
    const pipeline::HeuristicResult h = pipeline::primal_heuristic(toy.net, inst, toy.gen, ticks());
    ASSERT_TRUE(h.optimal()) << seed;
    EXPECT_TRUE(h.validation.feasible()) << seed << " worst " << h.validation.worst_violation;

    const milp::MilpResult cold =
        milp::solve_milp(gas::build_instance_milp(toy.net, inst, {}), exact);
    EXPECT_GE(h.objective(), cold.objective - 1e-2) << seed;

    // same restriction built directly with the modes fixed
    const milp::MilpResult direct =
        milp::solve_milp(gas::build_instance_milp(toy.net, inst, {}, h.z1), exact);
    EXPECT_NEAR(h.objective(), direct.objective, tolerance(direct.objective)) << seed;
  }
}

TEST(PrimalHeuristic, UsesTheGeneratorArgmax) {
  Toy toy;
  const gas::Instance inst = support::random_instance(toy.net, 3, 7);
  const nn::Tensor probs = toy.gen.forward(nn::encode(toy.net, toy.gen.layout(), {&inst}));
  gas::ModeSequence expected;
  for (int t = 0; t < 3; ++t) {
    int best = 0;
    for (int o = 1; o < static_cast<int>(toy.net.modes.size()); ++o)
      if (probs.at(0, o, t) > probs.at(0, best, t)) best = o;
    expected.push_back(best);
  }
  EXPECT_EQ(pipeline::primal_heuristic(toy.net, inst, toy.gen, ticks()).z1, expected);
}

// ------------------------------------------------------------- warm start

TEST(PartialSolution, HoldsModesDirectionsAndFuturePressures) {
  Toy toy;
  const gas::Instance inst = support::random_instance(toy.net, 2, 11);
  const milp::ParametricMilp m = gas::build_instance_milp(toy.net, inst, {});
  const milp::MilpResult r = milp::solve_milp(m, {});
  const auto partial = pipeline::partial_solution(toy.net, m, r.point, 2);
  const std::size_t boundary = toy.net.boundary_nodes().size();
  EXPECT_EQ(partial.size(), 2 * (toy.net.modes.size() + toy.net.num_groups + boundary));
  for (int t = 1; t <= 2; ++t) {
    for (int o = 0; o < static_cast<int>(toy.net.modes.size()); ++o) {
      const double v = partial.at(gas::ids::mode(toy.net, o, t));
      EXPECT_TRUE(v == 0.0 || v == 1.0);
    }
    for (int v : toy.net.boundary_nodes())
      EXPECT_EQ(partial.at(gas::ids::pressure(toy.net, v, t)),
                r.value(m, gas::ids::pressure(toy.net, v, t)));
  }
}

TEST(CompleteHint, OptimumCompletesToTheOptimum) {
  Toy toy;
  const gas::Instance inst = support::random_instance(toy.net, 2, 12);
  const milp::ParametricMilp m = gas::build_instance_milp(toy.net, inst, {});
  const milp::MilpResult r = milp::solve_milp(m, {});
  const auto hint = pipeline::complete_hint(m, pipeline::partial_solution(toy.net, m, r.point, 2), {});
  ASSERT_TRUE(hint.has_value());
  EXPECT_TRUE(milp::validate_solution(m, *hint, 1e-6).feasible());
  EXPECT_NEAR(m.evaluate_objective(*hint), r.objective, 1e-2);
}

TEST(CompleteHint, ContradictoryPartialHasNoCompletion) {
  Toy toy;
  const gas::Instance inst = support::random_instance(toy.net, 2, 13);
  const milp::ParametricMilp m = gas::build_instance_milp(toy.net, inst, {});
  std::map<std::string, double> partial;
  for (int o = 0; o < 2; ++o) partial[gas::ids::mode(toy.net, o, 1)] = 1.0;
  EXPECT_FALSE(pipeline::complete_hint(m, partial, {}).has_value());
}

TEST(WarmStart, OptimalHintKeepsObjectiveAndDoesNotAddNodes) {
  Toy toy;
  const gas::Instance inst = support::random_instance(toy.net, 3, 14);
  const milp::ParametricMilp m = gas::build_instance_milp(toy.net, inst, {});
  const milp::MilpResult cold = milp::solve_milp(m, {});
  const milp::MilpResult warm = milp::solve_milp(m, {}, cold.point);
  EXPECT_EQ(warm.hint, milp::HintStatus::Accepted);
  EXPECT_NEAR(warm.objective, cold.objective, tolerance(cold.objective));
  EXPECT_LE(warm.node_count, cold.node_count);
}

TEST(WarmStart, AgreesWithColdSolve) {
  Toy toy;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const gas::Instance inst = support::random_instance(toy.net, 3, 400 + seed);
    const pipeline::WarmStartResult w = pipeline::warm_start_solve(toy.net, inst, toy.gen, ticks());
    const pipeline::ColdResult c = pipeline::cold_solve(toy.net, inst, ticks());
    ASSERT_TRUE(w.warm.has_solution() && c.result.has_solution()) << seed;
    EXPECT_TRUE(w.hint_built) << seed;
    EXPECT_TRUE(w.accepted()) << seed;
    EXPECT_NEAR(w.warm.objective, c.result.objective, tolerance(c.result.objective)) << seed;
    EXPECT_LE(w.warm.objective, w.heuristic.objective() + 1e-6) << seed;
    EXPECT_GE(w.warm_time, w.completion_time);
  }
}

// ------------------------------------------------------------------ suite

TEST(EvaluateSuite, RecordsAreCompleteAndOrdered) {
  Toy toy;
  std::vector<pipeline::NamedInstance> insts;
  for (int i = 0; i < 3; ++i)
    insts.push_back({"i" + std::to_string(i), support::random_instance(toy.net, 2, 50 + i)});
  const pipeline::SuiteReport rep = pipeline::evaluate_suite(toy.net, insts, toy.gen, ticks());
  ASSERT_EQ(rep.records.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    const EvalRecord& r = rep.records[i];
    EXPECT_EQ(r.instance_id, "i" + std::to_string(i));
    EXPECT_FALSE(r.failed()) << r.error;
    EXPECT_TRUE(r.heuristic_valid);
    EXPECT_GE(r.f_heuristic, r.f_cold - 1e-2);
    EXPECT_GE(r.t_cold, 0.0);
    EXPECT_GE(r.t_warm, 0.0);
    EXPECT_EQ(r.t_infer, 0.0);  // not measured under ticks
  }
  EXPECT_EQ(rep.summary.instances, 3u);
}

TEST(EvaluateSuite, ReportBytesDoNotDependOnRunOrThreads) {
  Toy toy;
  std::vector<pipeline::NamedInstance> insts;
  for (int i = 0; i < 4; ++i)
    insts.push_back({std::to_string(i), support::random_instance(toy.net, 2, 60 + i)});
  const std::string a = pipeline::to_csv(pipeline::evaluate_suite(toy.net, insts, toy.gen, ticks()).records);
  const std::string b = pipeline::to_csv(pipeline::evaluate_suite(toy.net, insts, toy.gen, ticks(), 3).records);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.substr(0, a.find('\n')), pipeline::kCsvHeader);
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 5);
}

TEST(EvaluateSuite, FailingInstanceIsRecordedAndSuiteContinues) {
  Toy toy;
  gas::Instance broken = support::random_instance(toy.net, 2, 70);
  broken.flow_forecast[toy.net.boundary_nodes()[0]].clear();
  LogCapture logs;
  const pipeline::SuiteReport rep = pipeline::evaluate_suite(
      toy.net, {{"good", support::random_instance(toy.net, 2, 71)}, {"broken", broken}}, toy.gen,
      ticks());
  EXPECT_FALSE(rep.records[0].failed());
  EXPECT_TRUE(rep.records[1].failed());
  EXPECT_EQ(rep.summary.failures, 1u);
  EXPECT_TRUE(logs.contains("instance broken failed"));
  EXPECT_TRUE(rep.records[1].to_json()["f_cold"].is_null());
}

TEST(EvaluateSuite, NeedsInstances) {
  Toy toy;
  EXPECT_THROW((void)pipeline::evaluate_suite(toy.net, {}, toy.gen, ticks()), pipeline::PipelineError);
}

TEST(LoadInstances, DirectoryIsSortedByFileName) {
  Toy toy;
  const fs::path dir = fs::temp_directory_path() / "gaswarm_pipeline_instances";
  fs::remove_all(dir);
  fs::create_directories(dir);
  for (const char* name : {"b", "a"}) {
    std::ofstream(dir / (std::string(name) + ".json"))
        << gas::to_json(toy.net, support::random_instance(toy.net, 2, name[0])).dump();
  }
  std::ofstream(dir / "notes.txt") << "ignored";
  const auto insts = pipeline::load_instances(toy.net, dir.string());
  ASSERT_EQ(insts.size(), 2u);
  EXPECT_EQ(insts[0].id, "a");
  EXPECT_EQ(insts[1].id, "b");
  EXPECT_EQ(insts[1].instance.flow_forecast,
            support::random_instance(toy.net, 2, 'b').flow_forecast);
  fs::remove_all(dir);
  EXPECT_THROW((void)pipeline::load_instances(toy.net, dir.string()), pipeline::PipelineError);
}

TEST(LoadInstances, NdjsonUsesSampleIndices) {
  Toy toy;
  const fs::path file = fs::temp_directory_path() / "gaswarm_pipeline_instances.ndjson";
  std::vector<data::LabelledSample> samples(2);
  for (int i = 0; i < 2; ++i) {
    samples[i].pi = support::random_instance(toy.net, 2, 80 + i);
    samples[i].z1 = {0, 1};
    samples[i].sample_index = 40 + i;
  }
  data::write_ndjson(toy.net, samples, file.string());
  const auto insts = pipeline::load_instances(toy.net, file.string());
  ASSERT_EQ(insts.size(), 2u);
  EXPECT_EQ(insts[1].id, "41");
  fs::remove(file);
}

TEST(Report, WritesCsvAndJsonWithConfigEcho) {
  EvalRecord r = record("r0", 1.0, 2.0);
  r.nodes_warm = 3;
  r.nodes_cold = 4;
  r.accepted = true;
  pipeline::SuiteReport rep{{r}, pipeline::summarize({r}, 1e-2)};
  const fs::path dir = fs::temp_directory_path() / "gaswarm_pipeline_report";
  fs::remove_all(dir);
  pipeline::write_report(rep, ticks().to_json(), dir.string());
  EXPECT_EQ(read_file(dir / "report.csv"),
            std::string(pipeline::kCsvHeader) + "\nr0,10,10,0,0,1,2,3,4,1\n");
  const nlohmann::json j = nlohmann::json::parse(read_file(dir / "report.json"));
  EXPECT_EQ(j.at("config").at("clock"), "ticks");
  EXPECT_EQ(j.at("records").at(0).at("nodes_cold"), 4);
  EXPECT_EQ(j.at("summary").at("instances"), 1);
  fs::remove_all(dir);
}

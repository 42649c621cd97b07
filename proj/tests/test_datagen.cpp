#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gaswarm/data/dataset.hpp"
#include "gaswarm/data/sampler.hpp"

using namespace gaswarm;
using data::SamplerConfig;
using data::SplitMix64;

namespace {

SamplerConfig toy_config() {
  return data::load_sampler_config(std::string(GASWARM_FIXTURE_DIR) + "/sampler_defaults.json",
                                   "toy");
}

// Replays one fixed 64-bit word forever.
class ConstantSource : public data::RandomSource {
 public:
  explicit ConstantSource(std::uint64_t w) : w_(w) {}
  std::uint64_t next_u64() override { return w_; }

 private:
  std::uint64_t w_;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("gaswarm_test_" + name);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Rng, SplitMixReferenceOutput) {
  // first outputs of the published splitmix64 with state 0
  SplitMix64 r(0);
  EXPECT_EQ(r.next_u64(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(r.next_u64(), 0x6e789e6aa1b965f4ULL);
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  auto a = SplitMix64::stream(7, data::kStreamForecast, 3);
  auto b = SplitMix64::stream(7, data::kStreamForecast, 3);
  auto c = SplitMix64::stream(7, data::kStreamForecast, 4);
  auto d = SplitMix64::stream(7, data::kStreamScenario, 3);
  const auto x = a.next_u64();
  EXPECT_EQ(x, b.next_u64());
  EXPECT_NE(x, c.next_u64());
  EXPECT_NE(x, d.next_u64());
}

TEST(Rng, BelowIsRoughlyUniform) {
  SplitMix64 r(42);
  std::vector<int> hits(5, 0);
  for (int i = 0; i < 50000; ++i) ++hits.at(r.below(5));
  for (int h : hits) EXPECT_NEAR(h, 10000, 400);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(SamplerConfig, FixtureAndValidation) {
  const SamplerConfig c = toy_config();
  EXPECT_DOUBLE_EQ(c.flow_max, 400.0);
  EXPECT_DOUBLE_EQ(c.flow_step_limit, 200.0);
  EXPECT_DOUBLE_EQ(c.pressure_step_limit, 5.0);
  EXPECT_DOUBLE_EQ(c.switch_threshold, 0.9);
  const SamplerConfig back = data::sampler_config_from_json(data::to_json(c));
  EXPECT_EQ(data::to_json(back), data::to_json(c));
  SamplerConfig bad = c;
  bad.switch_threshold = 1.0;
  EXPECT_THROW(bad.validate(), data::DatagenError);
  bad = c;
  bad.flow_step_limit = 0.0;
  EXPECT_THROW(bad.validate(), data::DatagenError);
  EXPECT_THROW((void)data::load_sampler_config(
                   std::string(GASWARM_FIXTURE_DIR) + "/sampler_defaults.json", "nowhere"),
               data::DatagenError);
}

// Independent scan of every accepted flow forecast.
void scan_flows(const gas::GasNetwork& net, const SamplerConfig& c,
                const std::vector<std::vector<double>>& q, int horizon, double& worst_step) {
  const double box = 1.05 * c.flow_max;
  for (int t = 0; t < horizon; ++t) {
    double sum = 0.0;
    for (int v : net.boundary_nodes()) {
      const double x = q[v].at(t);
      sum += x;
      EXPECT_LE(std::abs(x), box + 1e-9);
      if (x != 0.0) EXPECT_EQ(x > 0.0, net.nodes[v].entry) << net.nodes[v].id;
      if (t > 0) worst_step = std::max(worst_step, std::abs(x - q[v][t - 1]));
    }
    EXPECT_NEAR(sum, 0.0, 1e-9);
    for (int g = 0; g < net.num_groups; ++g)
      for (int v : net.group_members(g))
        for (int w : net.group_members(g))
          if (q[v][t] != 0.0 && q[w][t] != 0.0) EXPECT_LE(std::abs(q[v][t] - q[w][t]), 200.0);
  }
}

TEST(FlowForecast, ToyScanOverTenThousandSteps) {
  const auto net = gas::toy_station();
  const SamplerConfig c = toy_config();
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    auto rng = SplitMix64::stream(3, data::kStreamForecast, i);
    const auto q = data::sample_flow_forecast(net, c, 11, rng);
    scan_flows(net, c, q, 11, worst);
    // toy groups are single nodes with a fixed attribute: every step is signed
    for (int v : net.boundary_nodes())
      for (double x : q[v]) EXPECT_EQ(x > 0.0, net.nodes[v].entry);
  }
  EXPECT_LE(worst, 200.0);
  EXPECT_GT(worst, 150.0);  // the limit is actually exercised
}

TEST(FlowForecast, PairedGroupsActivateOneMember) {
  const auto net = gas::station_d_template();
  auto c = data::load_sampler_config(std::string(GASWARM_FIXTURE_DIR) + "/sampler_defaults.json",
                                     "station_d");
  double worst = 0.0;
  for (int i = 0; i < 300; ++i) {
    auto rng = SplitMix64::stream(5, data::kStreamForecast, i);
    const auto q = data::sample_flow_forecast(net, c, 12, rng);
    scan_flows(net, c, q, 12, worst);
    for (int g = 0; g < 3; ++g)
      for (int t = 0; t < 12; ++t) {
        int nonzero = 0;
        for (int v : net.group_members(g)) nonzero += q[v][t] != 0.0;
        EXPECT_LE(nonzero, 1);
      }
  }
  EXPECT_LE(worst, 200.0);
}

TEST(FlowForecast, DeterministicGivenSeed) {
  const auto net = gas::toy_station();
  auto a = SplitMix64(9), b = SplitMix64(9);
  EXPECT_EQ(data::sample_flow_forecast(net, toy_config(), 6, a),
            data::sample_flow_forecast(net, toy_config(), 6, b));
}

TEST(FlowForecast, TooManyGroups) {
  auto net = gas::toy_station();
  net.nodes.push_back({"X", true, true, 3, 30.0, 80.0});
  net.num_groups = 4;
  SplitMix64 rng(1);
  EXPECT_THROW((void)data::sample_flow_forecast(net, toy_config(), 2, rng),
               data::TooManyBoundaryGroups);
}

TEST(FlowForecast, RejectionBudget) {
  const auto net = gas::toy_station();
  SamplerConfig c = toy_config();
  c.flow_step_limit = 1e-6;
  c.max_rejections = 50;
  SplitMix64 rng(1);
  EXPECT_THROW((void)data::sample_flow_forecast(net, c, 3, rng), data::RejectionBudgetExceeded);
}

TEST(PressureForecast, RangeAndSteps) {
  const auto net = gas::toy_station();
  const SamplerConfig c = toy_config();
  const double r = c.pressure_max - c.pressure_min;
  const double lo = c.pressure_min - 0.05 * r, hi = c.pressure_max + 0.05 * r;
  double seen_lo = 1e9, seen_hi = -1e9;
  for (int i = 0; i < 1000; ++i) {
    auto rng = SplitMix64::stream(4, data::kStreamForecast, i);
    const auto p = data::sample_pressure_forecast(net, c, 12, rng);
    for (int v : net.boundary_nodes()) {
      ASSERT_EQ(p[v].size(), 12u);
      for (int t = 0; t < 12; ++t) {
        EXPECT_GE(p[v][t], lo);
        EXPECT_LE(p[v][t], hi);
        seen_lo = std::min(seen_lo, p[v][t]);
        seen_hi = std::max(seen_hi, p[v][t]);
        if (t > 0) EXPECT_LE(std::abs(p[v][t] - p[v][t - 1]), 5.0);
      }
    }
    for (std::size_t v = 0; v < net.nodes.size(); ++v)
      if (!net.nodes[v].boundary) EXPECT_TRUE(p[v].empty());
  }
  // the padding is reached, not just the unpadded range
  EXPECT_LT(seen_lo, c.pressure_min - 0.5);
  EXPECT_GT(seen_hi, c.pressure_max + 0.5);
}

TEST(PressureForecast, DegenerateRange) {
  const auto net = gas::toy_station();
  SamplerConfig c = toy_config();
  c.pressure_min = c.pressure_max = 60.0;
  SplitMix64 rng(2);
  const auto p = data::sample_pressure_forecast(net, c, 5, rng);
  for (int v : net.boundary_nodes())
    for (double x : p[v]) EXPECT_EQ(x, 60.0);
}

TEST(ModeSequence, SingleModeIsConstant) {
  SplitMix64 rng(3);
  const auto seq = data::sample_operation_mode_sequence(1, 12, toy_config(), rng);
  EXPECT_EQ(seq, gas::ModeSequence(12, 0));
}

TEST(ModeSequence, DrawsBelowThresholdNeverSwitch) {
  // word 2^63: uniform() = 0.5, below(4) = 2
  ConstantSource src(std::uint64_t{1} << 63);
  const auto seq = data::sample_operation_mode_sequence(4, 12, toy_config(), src);
  EXPECT_EQ(seq, gas::ModeSequence(12, 2));
}

TEST(ModeSequence, SwitchFrequencyMonteCarlo) {
  const SamplerConfig c = toy_config();
  long transitions = 0, switches = 0;
  std::vector<long> first(4, 0);
  for (int i = 0; i < 10000; ++i) {
    auto rng = SplitMix64::stream(11, data::kStreamScenario, i);
    const auto seq = data::sample_operation_mode_sequence(4, 11, c, rng);
    ASSERT_EQ(seq.size(), 11u);
    ++first.at(seq[0]);
    for (std::size_t t = 1; t < seq.size(); ++t) {
      ++transitions;
      switches += seq[t] != seq[t - 1];
    }
  }
  EXPECT_EQ(transitions, 100000);
  EXPECT_NEAR(static_cast<double>(switches) / transitions, 0.10, 0.01);
  for (long f : first) EXPECT_NEAR(f, 2500, 200);
}

TEST(GasConstants, PaddedBox) {
  const SamplerConfig c = toy_config();
  const auto& k = c.constants;
  auto inside = [](double x, data::Range r) {
    const double pad = 0.05 * (r.hi - r.lo);
    return x >= r.lo - pad && x <= r.hi + pad;
  };
  bool below_unpadded = false;
  for (int i = 0; i < 1000; ++i) {
    SplitMix64 rng = SplitMix64::stream(6, 0, i);
    const auto g = data::sample_gas_constants(k, c, gas::GasConstants{}, rng);
    EXPECT_TRUE(inside(g.temperature, k.temperature));
    EXPECT_TRUE(inside(g.norm_density, k.norm_density));
    EXPECT_TRUE(inside(g.molar_mass, k.molar_mass));
    EXPECT_TRUE(inside(g.pseudo_critical_temperature, k.pseudo_critical_temperature));
    EXPECT_TRUE(inside(g.pseudo_critical_pressure, k.pseudo_critical_pressure));
    EXPECT_EQ(g.gravity, gas::GasConstants{}.gravity);
    below_unpadded |= g.temperature < k.temperature.lo;
  }
  EXPECT_TRUE(below_unpadded);
  const data::Range r{10.0, 20.0};
  EXPECT_DOUBLE_EQ(r.padded(0.05).lo, 9.5);
  EXPECT_DOUBLE_EQ(r.padded(0.05).hi, 20.5);
}

TEST(GasConstants, DegenerateRangeIsExact) {
  SamplerConfig c = toy_config();
  c.constants.molar_mass = {0.018, 0.018};
  SplitMix64 rng(8);
  EXPECT_EQ(data::sample_gas_constants(c.constants, c, {}, rng).molar_mass, 0.018);
}

class InitialState : public ::testing::Test {
 protected:
  gas::GasNetwork net = gas::toy_station();
  SamplerConfig sampler = toy_config();
  data::GenerationConfig gen{4, 1800.0, {}, {60.0, 1e-6, 1e-4, 1e-2}};
};

TEST_F(InitialState, SeedPoolStatesAreConsistent) {
  const auto pool = data::bootstrap_seed_pool(net, sampler, gen);
  ASSERT_EQ(pool.size(), 1u);
  EXPECT_TRUE(gas::check_state(net, pool[0].state, 1e-6).empty());
}

TEST_F(InitialState, ReturnsRequestedStepAndValidates) {
  const auto pool = data::bootstrap_seed_pool(net, sampler, gen);
  SplitMix64 a(21), b(21), c(21);
  const auto s = data::generate_initial_state(net, pool, sampler, gen, gen.horizon, a);
  EXPECT_TRUE(gas::check_state(net, s.state, 1e-6).empty());

  // replay the same draws by hand and compare with the final step
  const data::Forecast f = data::sample_forecast(net, sampler, gen.horizon, b);
  data::StartState start;
  start.constants = data::sample_gas_constants(sampler.constants, sampler, net.constants, b);
  start.state = pool[b.below(pool.size())].state;
  const auto z1 =
      data::sample_operation_mode_sequence(static_cast<int>(net.modes.size()), gen.horizon,
                                           sampler, b);
  const auto inst = data::make_instance(f, start, gen);
  const auto model = gas::build_instance_milp(net, inst, gen.weights, z1);
  const auto res = milp::solve_milp(model, gen.solve);
  ASSERT_TRUE(res.has_solution());
  const auto last = gas::extract_state(net, model, res.point, gen.horizon);
  EXPECT_EQ(last.pressure, s.state.pressure);
  EXPECT_EQ(last.pipe_in, s.state.pipe_in);
  EXPECT_EQ(last.mode, z1.back());
  EXPECT_EQ(s.constants.molar_mass, start.constants.molar_mass);

  const auto again = data::generate_initial_state(net, pool, sampler, gen, gen.horizon, c);
  EXPECT_EQ(again.state.pressure, s.state.pressure);
}

TEST_F(InitialState, RejectsBadDistance) {
  const auto pool = data::bootstrap_seed_pool(net, sampler, gen);
  SplitMix64 rng(1);
  EXPECT_THROW((void)data::generate_initial_state(net, pool, sampler, gen, 0, rng),
               data::DatagenError);
  EXPECT_THROW((void)data::generate_initial_state(net, pool, sampler, gen, 5, rng),
               data::DatagenError);
  EXPECT_THROW((void)data::generate_initial_state(net, {}, sampler, gen, 1, rng),
               data::DatagenError);
}

class Dataset : public ::testing::Test {
 protected:
  gas::GasNetwork net = gas::toy_station();
  SamplerConfig sampler = toy_config();
  data::DatasetConfig config() const {
    data::DatasetConfig c;
    c.num_states = 3;
    c.num_scenarios = 12;
    c.time_step_difference = 4;
    c.seed = 77;
    c.generation.horizon = 4;
    return c;
  }
};

TEST_F(Dataset, SingleScenarioMatchesDirectSolve) {
  auto cfg = config();
  cfg.num_scenarios = 1;
  const auto ds = data::generate_dataset(net, sampler, cfg);
  ASSERT_EQ(ds.samples.size(), 1u);
  const auto& s = ds.samples[0];
  EXPECT_EQ(s.sample_index, 0u);
  EXPECT_EQ(s.seed, 77u);
  const auto res = data::solve_fixed(net, s.pi, s.z1, cfg.generation);
  ASSERT_EQ(res.status, milp::SolveStatus::Optimal);
  EXPECT_NEAR(res.objective, s.objective, cfg.generation.solve.mip_gap_abs);
}

TEST_F(Dataset, LabelsAreNonnegativeAndResolve) {
  const auto cfg = config();
  const auto ds = data::generate_dataset(net, sampler, cfg);
  EXPECT_EQ(ds.samples.size() + ds.failures.size(), 12u);
  EXPECT_TRUE(ds.failures.empty());
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const auto& s = ds.samples[i];
    EXPECT_EQ(s.sample_index, i);
    EXPECT_GE(s.objective, 0.0);
    EXPECT_EQ(static_cast<int>(s.z1.size()), cfg.generation.horizon);
    gas::validate_instance(net, s.pi);
    if (i % 3 == 0) {
      const auto res = data::solve_fixed(net, s.pi, s.z1, cfg.generation);
      EXPECT_NEAR(res.objective, s.objective, cfg.generation.solve.mip_gap_abs);
    }
  }
}

TEST_F(Dataset, ByteIdenticalAcrossRunsAndThreads) {
  auto cfg = config();
  const auto dir = scratch_dir("dataset");
  const auto a = data::generate_dataset(net, sampler, cfg);
  cfg.threads = 3;
  const auto b = data::generate_dataset(net, sampler, cfg);
  data::write_ndjson(net, a.samples, (dir / "a.ndjson").string());
  data::write_ndjson(net, b.samples, (dir / "b.ndjson").string());
  const std::string bytes = slurp((dir / "a.ndjson").string());
  EXPECT_FALSE(bytes.empty());
  EXPECT_EQ(bytes, slurp((dir / "b.ndjson").string()));

  cfg.seed = 78;
  const auto c = data::generate_dataset(net, sampler, cfg);
  data::write_ndjson(net, c.samples, (dir / "c.ndjson").string());
  EXPECT_NE(bytes, slurp((dir / "c.ndjson").string()));
}

TEST_F(Dataset, NdjsonRoundTrip) {
  auto cfg = config();
  cfg.num_scenarios = 3;
  const auto ds = data::generate_dataset(net, sampler, cfg);
  const auto path = (scratch_dir("ndjson") / "d.ndjson").string();
  data::write_ndjson(net, ds.samples, path);
  const auto back = data::read_ndjson(net, path);
  ASSERT_EQ(back.size(), ds.samples.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].z1, ds.samples[i].z1);
    EXPECT_EQ(back[i].objective, ds.samples[i].objective);
    EXPECT_EQ(data::to_json(net, back[i]), data::to_json(net, ds.samples[i]));
  }
  const auto rec = data::to_json(net, ds.samples[0]);
  for (const auto& row : rec.at("z1")) {
    int ones = 0;
    for (const auto& b : row) ones += b.get<int>();
    EXPECT_EQ(ones, 1);
  }
}

TEST(OneHot, RejectsMalformedRows) {
  EXPECT_THROW((void)data::from_one_hot(nlohmann::json::parse("[[1,1,0]]")), data::DatagenError);
  EXPECT_THROW((void)data::from_one_hot(nlohmann::json::parse("[[0,0]]")), data::DatagenError);
  EXPECT_THROW((void)data::from_one_hot(nlohmann::json::parse("[[2,0]]")), data::DatagenError);
  EXPECT_EQ(data::from_one_hot(nlohmann::json::parse("[[0,1],[1,0]]")), (gas::ModeSequence{1, 0}));
}

TEST_F(Dataset, AbortsOnlyWhenNoInitialStateSurvives) {
  auto cfg = config();
  cfg.num_scenarios = 2;
  auto tight = sampler;
  tight.flow_step_limit = 1e-9;
  tight.max_rejections = 5;
  try {
    (void)data::generate_dataset(net, tight, cfg);
    FAIL() << "expected DatagenError";
  } catch (const data::DatagenError& e) {
    EXPECT_NE(std::string(e.what()).find("initial state"), std::string::npos);
  }
}

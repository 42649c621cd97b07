#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "gaswarm/gas/network.hpp"
#include "gaswarm/nn/adam.hpp"
#include "gaswarm/nn/encoding.hpp"
#include "gaswarm/nn/networks.hpp"
#include "gaswarm/nn/ops.hpp"
#include "gaswarm/nn/weights.hpp"
#include "support/gradcheck.hpp"
#include "support/instances.hpp"

using namespace gaswarm;
using nn::Padding;
using nn::Tensor;

namespace {

constexpr double kGradTol = 1e-4;

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("gaswarm_test_nn_" + name);
}

nn::ArchConfig small_arch() {
  nn::ArchConfig a;
  a.channels = 4;
  a.generator_blocks = 2;
  a.discriminator_blocks = 2;
  a.branch_kernels = {1, 3};
  a.branch_width = 2;
  return a;
}

struct ToyBatch {
  gas::GasNetwork net = gas::network_template("toy");
  std::vector<gas::Instance> instances;
  nn::EncodingLayout layout = nn::make_layout(net);
  nn::EncodedBatch enc;

  ToyBatch(int n, int horizon) {
    for (int i = 0; i < n; ++i) instances.push_back(support::random_instance(net, horizon, 40 + i));
    std::vector<const gas::Instance*> ptrs;
    for (const auto& inst : instances) ptrs.push_back(&inst);
    enc = nn::encode(net, layout, ptrs);
  }
};

}  // namespace

TEST(Activations, SpotValues) {
  EXPECT_NEAR(nn::softplus(0.0, 1.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(nn::softplus(0.0, 2.0), std::log(2.0) / 2.0, 1e-15);
  EXPECT_NEAR(nn::softplus(800.0, 1.0), 800.0, 1e-12);
  EXPECT_GT(nn::softplus(-800.0, 1.0), -1e-300);
  EXPECT_EQ(nn::relu(-1.0), 0.0);
  EXPECT_EQ(nn::relu(2.5), 2.5);

  const auto even = nn::softmax({0.0, 0.0}, 3.0);
  EXPECT_DOUBLE_EQ(even[0], 0.5);
  EXPECT_DOUBLE_EQ(even[1], 0.5);
  const auto s = nn::softmax({1.0, 0.0}, 2.0);
  EXPECT_NEAR(s[0], std::exp(2.0) / (std::exp(2.0) + 1.0), 1e-15);
  const auto big = nn::softmax({1000.0, 0.0, -1000.0}, 1.0);
  EXPECT_NEAR(big[0], 1.0, 1e-15);
}

TEST(Conv1d, ValidDifferenceKernel) {
  Tensor x({1, 1, 4}, {1, 2, 3, 4});
  Tensor w({1, 1, 2}, {1, -1});
  Tensor b({1}, {0});
  const Tensor y = nn::conv1d(x, w, b, Padding::Valid);
  ASSERT_EQ(y.shape(), (std::vector<int>{1, 1, 3}));
  for (int t = 0; t < 3; ++t) EXPECT_DOUBLE_EQ(y.at(0, 0, t), -1.0);
}

TEST(Conv1d, SameIdentityKernelKeepsInput) {
  data::SplitMix64 rng(3);
  Tensor x = gradcheck::random_tensor({2, 3, 5}, rng);
  for (int k : {1, 3, 5}) {
    Tensor w({3, 3, k});
    for (int c = 0; c < 3; ++c) w[(c * 3 + c) * k + (k - 1) / 2] = 1.0;
    const Tensor y = nn::conv1d(x, w, Tensor({3}), Padding::Same);
    EXPECT_EQ(y, x) << "k=" << k;
  }
}

TEST(Conv1d, SamePaddingZeroFillsEdges) {
  Tensor x({1, 1, 3}, {1, 2, 3});
  Tensor w({1, 1, 3}, {1, 1, 1});
  const Tensor y = nn::conv1d(x, w, Tensor({1}, {0.5}), Padding::Same);
  EXPECT_DOUBLE_EQ(y[0], 3.5);
  EXPECT_DOUBLE_EQ(y[1], 6.5);
  EXPECT_DOUBLE_EQ(y[2], 5.5);
}

TEST(Conv1d, RejectsMismatchedChannels) {
  Tensor x({1, 2, 3});
  Tensor w({1, 3, 1});
  EXPECT_THROW((void)nn::conv1d(x, w, Tensor({1}), Padding::Same), nn::ShapeMismatch);
  EXPECT_THROW((void)nn::conv1d(Tensor({1, 1, 2}), Tensor({1, 1, 3}), Tensor({1}), Padding::Valid),
               nn::ShapeMismatch);
}

TEST(Merge, FixedKernelByHand) {
  // C = 1, K = 1: y = w_a * a + w_b * b + bias
  Tensor a({1, 1, 2}, {1, 2});
  Tensor b({1, 1, 2}, {10, 20});
  Tensor w({1, 1, 2, 1}, {2, -1});
  const Tensor y = nn::merge_streams(a, b, w, Tensor({1}, {0.25}));
  EXPECT_DOUBLE_EQ(y[0], 2 - 10 + 0.25);
  EXPECT_DOUBLE_EQ(y[1], 4 - 20 + 0.25);
}

TEST(Merge, TimeKernelSeesNeighbours) {
  // K = 3 with only the b-row's right tap set: y_t = b_{t+1}
  Tensor a({1, 1, 3}, {5, 6, 7});
  Tensor b({1, 1, 3}, {1, 2, 3});
  Tensor w({1, 1, 2, 3}, {0, 0, 0, 0, 0, 1});
  const Tensor y = nn::merge_streams(a, b, w, Tensor({1}));
  EXPECT_DOUBLE_EQ(y[0], 2);
  EXPECT_DOUBLE_EQ(y[1], 3);
  EXPECT_DOUBLE_EQ(y[2], 0);
}

TEST(Inception, ZeroParametersGiveIdentity) {
  data::SplitMix64 rng(5);
  nn::ParameterStore store;
  nn::InceptionBlock block(store, "b", 4, {1, 3, 5}, 2, rng);
  for (std::size_t i = 0; i < store.size(); ++i) store[i].value.fill(0.0);
  const Tensor x = gradcheck::random_tensor({2, 4, 6}, rng);
  EXPECT_EQ(block.forward(x, nullptr), x);
}

TEST(Channels, ConcatAndSliceRoundTrip) {
  data::SplitMix64 rng(6);
  const Tensor a = gradcheck::random_tensor({2, 2, 3}, rng);
  const Tensor b = gradcheck::random_tensor({2, 3, 3}, rng);
  const Tensor c = nn::concat_channels({&a, &b});
  ASSERT_EQ(c.shape(), (std::vector<int>{2, 5, 3}));
  EXPECT_EQ(nn::slice_channels(c, 0, 2), a);
  EXPECT_EQ(nn::slice_channels(c, 2, 3), b);
}

TEST(Rounding, TiesGoToLowestIndexAndIsIdempotent) {
  Tensor p({1, 3, 2}, {0.4, 0.2, 0.4, 0.2, 0.2, 0.6});
  const Tensor z = nn::round_to_one_hot(p);
  EXPECT_EQ(z, Tensor({1, 3, 2}, {1, 0, 0, 0, 0, 1}));
  EXPECT_EQ(nn::round_to_one_hot(z), z);
  EXPECT_EQ(nn::argmax_channels(p, 0), (std::vector<int>{0, 2}));
}

class GradientCheck : public ::testing::TestWithParam<std::string> {};

TEST_P(GradientCheck, MatchesCentralDifferences) {
  data::SplitMix64 rng(nn::fnv1a(GetParam()));
  gradcheck::Report report;
  for (int trial = 0; trial < 4; ++trial) gradcheck::trial(GetParam(), rng, report);
  EXPECT_GT(report.checked, 0);
  EXPECT_LT(report.worst, kGradTol) << report.where;
}

INSTANTIATE_TEST_SUITE_P(Layers, GradientCheck, ::testing::ValuesIn(gradcheck::layer_kinds()));

TEST(Encoding, ToyShapesAndScaling) {
  ToyBatch batch(3, 5);
  const auto& l = batch.layout;
  EXPECT_EQ(l.boundary, 3);
  EXPECT_EQ(batch.enc.flow.shape(), (std::vector<int>{3, 3, 5}));
  EXPECT_EQ(batch.enc.pressure.shape(), (std::vector<int>{3, 3, 5}));
  EXPECT_EQ(batch.enc.state.shape(), (std::vector<int>{3, l.state_width(), 5}));
  const int v = batch.net.boundary_nodes()[0];
  EXPECT_DOUBLE_EQ(batch.enc.flow.at(1, 0, 2),
                   batch.instances[1].flow_forecast[v][2] / batch.net.inflow_max);
  for (double p : batch.enc.pressure.data()) EXPECT_LE(std::abs(p), 1.0 + 1e-12);
  // initial state is constant over time
  for (int t = 1; t < 5; ++t) EXPECT_EQ(batch.enc.state.at(2, 0, t), batch.enc.state.at(2, 0, 0));
}

TEST(Encoding, ModesOneHotAndBadIndex) {
  const gas::ModeSequence seq{0, 3, 1};
  const Tensor z = nn::encode_modes({&seq}, 4);
  EXPECT_EQ(nn::argmax_channels(z, 0), (std::vector<int>{0, 3, 1}));
  const gas::ModeSequence bad{0, 4};
  EXPECT_THROW((void)nn::encode_modes({&bad}, 4), nn::ShapeMismatch);
}

TEST(Encoding, LayoutJsonRoundTrip) {
  const auto l = nn::make_layout(gas::network_template("station_d"));
  EXPECT_EQ(nn::EncodingLayout::from_json(l.to_json()), l);
}

TEST(Generator, SlicesAreDistributions) {
  ToyBatch batch(2, 6);
  nn::GeneratorNet gen(batch.layout, small_arch(), 11);
  const Tensor p = gen.forward(batch.enc);
  ASSERT_EQ(p.shape(), (std::vector<int>{2, batch.layout.modes, 6}));
  for (int b = 0; b < 2; ++b)
    for (int t = 0; t < 6; ++t) {
      double s = 0.0;
      for (int o = 0; o < batch.layout.modes; ++o) {
        EXPECT_GE(p.at(b, o, t), 0.0);
        s += p.at(b, o, t);
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
}

TEST(Generator, TemperatureSharpensTowardsOneHot) {
  ToyBatch batch(2, 4);
  nn::GeneratorNet gen(batch.layout, small_arch(), 12);
  const std::vector<int> winner0 = nn::argmax_channels(gen.forward(batch.enc), 0);
  double prev = 0.0;
  for (double temp : {1.0, 5.0, 25.0}) {
    gen.set_temperature(temp);
    const Tensor p = gen.forward(batch.enc);
    double mean_max = 0.0;
    for (int t = 0; t < 4; ++t) mean_max += p.at(0, winner0[t], t) / 4.0;
    EXPECT_GE(mean_max, prev) << "T=" << temp;
    EXPECT_EQ(nn::argmax_channels(p, 0), winner0);
    prev = mean_max;
  }
}

TEST(Generator, HorizonAgnostic) {
  ToyBatch shortb(1, 3), longb(1, 9);
  nn::GeneratorNet gen(shortb.layout, small_arch(), 13);
  EXPECT_EQ(gen.forward(shortb.enc).dim(2), 3);
  EXPECT_EQ(gen.forward(longb.enc).dim(2), 9);
}

TEST(Discriminator, NonNegativeOnRandomInputs) {
  ToyBatch batch(3, 5);
  nn::DiscriminatorNet disc(batch.layout, small_arch(), 14);
  data::SplitMix64 rng(14);
  for (int rep = 0; rep < 5; ++rep) {
    gradcheck::detail::randomize(disc.params(), rng);
    Tensor z = gradcheck::random_tensor({3, batch.layout.modes, 5}, rng);
    const Tensor f = disc.forward(z, batch.enc);
    ASSERT_EQ(f.shape(), (std::vector<int>{3}));
    for (double v : f.data()) EXPECT_GE(v, 0.0);
  }
}

TEST(Networks, ForwardIsPureAndDeterministic) {
  ToyBatch batch(2, 5);
  nn::GeneratorNet a(batch.layout, small_arch(), 15), b(batch.layout, small_arch(), 15);
  const Tensor first = a.forward(batch.enc);
  EXPECT_EQ(a.forward(batch.enc), first);
  EXPECT_EQ(b.forward(batch.enc), first);
  nn::GeneratorNet c(batch.layout, small_arch(), 16);
  EXPECT_NE(c.forward(batch.enc), first);
}

TEST(Networks, RejectWrongInputWidth) {
  ToyBatch batch(1, 4);
  nn::GeneratorNet gen(batch.layout, small_arch(), 17);
  nn::EncodedBatch bad = batch.enc;
  bad.state = Tensor({1, batch.layout.state_width() + 1, 4});
  EXPECT_THROW((void)gen.forward(bad), nn::ShapeMismatch);
}

TEST(Adam, ZeroGradientLeavesParametersWithoutDecay) {
  nn::ParameterStore store;
  auto& p = store.add("p", {3});
  p.value = Tensor({3}, {1, -2, 3});
  nn::Adam opt(store, {.lr = 0.1});
  store.zero_grad();
  opt.step();
  EXPECT_EQ(p.value, Tensor({3}, {1, -2, 3}));
}

TEST(Adam, FirstStepMovesByLearningRate) {
  nn::ParameterStore store;
  auto& p = store.add("p", {2});
  p.value = Tensor({2}, {1, 1});
  nn::Adam opt(store, {.lr = 0.01});
  p.grad = Tensor({2}, {3, -0.5});
  opt.step();
  EXPECT_NEAR(p.value[0], 1 - 0.01, 1e-8);
  EXPECT_NEAR(p.value[1], 1 + 0.01, 1e-8);
  EXPECT_EQ(opt.steps(), 1);
}

TEST(Adam, DecoupledWeightDecay) {
  nn::ParameterStore store;
  auto& p = store.add("p", {1});
  p.value = Tensor({1}, {2});
  nn::Adam opt(store, {.lr = 0.1, .weight_decay = 0.5});
  store.zero_grad();
  opt.step();
  EXPECT_NEAR(p.value[0], 2 - 0.1 * 0.5 * 2, 1e-12);
}

TEST(Adam, ReducesQuadratic) {
  nn::ParameterStore store;
  auto& p = store.add("p", {1});
  p.value = Tensor({1}, {5});
  nn::Adam opt(store, {.lr = 0.1});
  for (int i = 0; i < 500; ++i) {
    p.grad = Tensor({1}, {2 * p.value[0]});
    opt.step();
  }
  EXPECT_LT(std::abs(p.value[0]), 0.05);
}

TEST(Weights, RoundTripIsBitIdentical) {
  ToyBatch batch(2, 5);
  nn::GeneratorNet gen(batch.layout, small_arch(), 18);
  gen.set_temperature(3.5);
  nn::DiscriminatorNet disc(batch.layout, small_arch(), 19);
  const auto path = temp_path("pair.bin");
  nn::save_networks(path.string(), &gen, &disc);
  const nn::NetworkPair loaded = nn::load_networks(path.string(), &batch.layout);
  ASSERT_TRUE(loaded.generator && loaded.discriminator);
  EXPECT_EQ(loaded.generator->temperature(), 3.5);
  EXPECT_EQ(loaded.generator->forward(batch.enc), gen.forward(batch.enc));
  const Tensor z = gen.forward(batch.enc);
  EXPECT_EQ(loaded.discriminator->forward(z, batch.enc), disc.forward(z, batch.enc));
  EXPECT_EQ(loaded.generator->architecture_hash(), gen.architecture_hash());
  std::filesystem::remove(path);
}

TEST(Weights, GeneratorOnlyFile) {
  ToyBatch batch(1, 3);
  nn::GeneratorNet gen(batch.layout, small_arch(), 20);
  const auto path = temp_path("gen.bin");
  nn::save_networks(path.string(), &gen, nullptr);
  const auto loaded = nn::load_networks(path.string());
  EXPECT_TRUE(loaded.generator);
  EXPECT_FALSE(loaded.discriminator);
  std::filesystem::remove(path);
}

TEST(Weights, RejectsForeignLayoutAndCorruption) {
  ToyBatch batch(1, 3);
  nn::GeneratorNet gen(batch.layout, small_arch(), 21);
  const auto path = temp_path("bad.bin");
  nn::save_networks(path.string(), &gen, nullptr);
  const auto other = nn::make_layout(gas::network_template("station_d"));
  EXPECT_THROW((void)nn::load_networks(path.string(), &other), nn::FormatError);

  const auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size - 8);
  EXPECT_THROW((void)nn::load_networks(path.string()), nn::FormatError);

  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "NOTAWEIGHTSFILE";
  }
  EXPECT_THROW((void)nn::load_networks(path.string()), nn::FormatError);
  std::filesystem::remove(path);
}

TEST(Weights, CopyValues) {
  ToyBatch batch(1, 4);
  nn::GeneratorNet a(batch.layout, small_arch(), 22), b(batch.layout, small_arch(), 23);
  nn::copy_values(a.params(), b.params());
  EXPECT_EQ(a.forward(batch.enc), b.forward(batch.enc));
}

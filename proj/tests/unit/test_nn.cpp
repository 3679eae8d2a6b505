#include <gtest/gtest.h>

#include <cstdio>

#include "cmarl/nn/checkpoint.hpp"
#include "cmarl/nn/network.hpp"
#include "cmarl/nn/optim.hpp"
#include "../oracles/nn_oracles.hpp"

using namespace cmarl;
using namespace cmarl::nn;

TEST(ParameterStore, ViewsTileTheFlatVector) {
  ParameterStore store;
  Network ff({7, 16, 3, CellType::Feedforward}, store, "a");
  Network rnn({5, 8, 4, CellType::Recurrent}, store, "b");
  std::size_t expected = 0;
  for (const TensorView& v : store.views()) {
    EXPECT_EQ(v.offset, expected) << v.name;
    expected += v.size();
  }
  EXPECT_EQ(expected, store.size());
  EXPECT_EQ(store.grads().size(), store.values().size());
}

TEST(Network, ZeroParametersGiveZeroOutput) {
  for (CellType cell : {CellType::Feedforward, CellType::Recurrent}) {
    ParameterStore store;
    Network net({4, 8, 3, cell}, store, "n");
    RngStream rng(1, 0);
    const Mat x = oracle::random_matrix(rng, 4, 5);
    Mat h = net.initial_hidden(5), next;
    const Mat y = net.forward(store, x, &h, &next, nullptr);
    EXPECT_EQ(y, Mat::Zero(3, 5));
  }
}

TEST(Network, IdentityLinearLayerPassesInputThrough) {
  ParameterStore store;
  Linear layer(store, "id", 6, 6);
  store.value(layer.weight_id()).setIdentity();
  RngStream rng(2, 0);
  const Mat x = oracle::random_matrix(rng, 6, 3);
  EXPECT_EQ(layer.forward(store, x), x);
}

TEST(Network, GruForwardMatchesScalarEquations) {
  ParameterStore store;
  GruCell cell(store, "g", 3, 4);
  RngStream rng(5, 0);
  cell.init(store, rng);
  const Mat x = oracle::random_matrix(rng, 3, 1);
  const Mat h = oracle::random_matrix(rng, 4, 1);
  const Mat got = cell.forward(store, x, h, nullptr);
  const auto want = oracle::gru_step(store.value(0), store.value(1), store.value(2), store.value(3),
                                     {x(0, 0), x(1, 0), x(2, 0)}, {h(0, 0), h(1, 0), h(2, 0), h(3, 0)});
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(got(j, 0), want[static_cast<std::size_t>(j)], 1e-14);
}

TEST(Network, RejectsMismatchedInput) {
  ParameterStore store;
  Network net({4, 8, 3, CellType::Feedforward}, store, "n");
  EXPECT_THROW(net.forward(store, Mat::Zero(5, 1), nullptr, nullptr, nullptr), Error);
  ParameterStore s2;
  Network rnn({4, 8, 3, CellType::Recurrent}, s2, "r");
  EXPECT_THROW(rnn.forward(s2, Mat::Zero(4, 1), nullptr, nullptr, nullptr), Error);
  EXPECT_THROW(NetSpec({0, 8, 3, CellType::Feedforward}).validate(), Error);
}

TEST(Network, BackwardAfterParameterUpdateIsStale) {
  ParameterStore store;
  Network net({3, 4, 2, CellType::Feedforward}, store, "n");
  RngStream rng(1, 1);
  net.init(store, rng);
  Tape tape;
  const Mat y = net.forward(store, Mat::Ones(3, 2), nullptr, nullptr, &tape);
  Adam opt(store);
  opt.step(store);
  try {
    net.backward(store, tape, y, nullptr, nullptr);
    FAIL() << "expected StaleTape";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::StaleTape);
  }
  EXPECT_THROW(net.backward(store, Tape{}, y, nullptr, nullptr), Error);
}

TEST(Network, ForwardBackwardAreBitIdenticalAcrossRuns) {
  auto run = []() {
    ParameterStore store;
    Network net({5, 16, 3, CellType::Recurrent}, store, "n");
    RngStream rng(9, 0);
    net.init(store, rng);
    const Mat x = oracle::random_matrix(rng, 5, 4);
    Mat h = net.initial_hidden(4), next;
    Tape tape;
    const Mat y = net.forward(store, x, &h, &next, &tape);
    Mat dh;
    net.backward(store, tape, y, nullptr, &dh);
    return std::make_pair(y, ColVec(store.grads()));
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

TEST(GradientCheck, FeedforwardRandomCases) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const NetSpec spec{3 + static_cast<int>(seed % 5), 6, 2 + static_cast<int>(seed % 3), CellType::Feedforward};
    ASSERT_LT(oracle::gradient_check(spec, 3, 1, seed), 1e-4) << "seed " << seed;
  }
}

TEST(GradientCheck, RecurrentSingleStepRandomCases) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const NetSpec spec{2 + static_cast<int>(seed % 4), 5, 3, CellType::Recurrent};
    ASSERT_LT(oracle::gradient_check(spec, 2, 1, 1000 + seed), 1e-4) << "seed " << seed;
  }
}

TEST(GradientCheck, RecurrentTwoStepUnroll) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ASSERT_LT(oracle::gradient_check({3, 5, 2, CellType::Recurrent}, 2, 2, 2000 + seed), 1e-4);
  }
}

TEST(GradientCheck, RecurrentFiftyStepUnroll) {
  EXPECT_LT(oracle::gradient_check({3, 6, 2, CellType::Recurrent}, 2, 50, 77), 1e-4);
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  ParameterStore store;
  Network net({3, 4, 2, CellType::Feedforward}, store, "n");
  RngStream rng(3, 0);
  net.init(store, rng);
  const ColVec before = store.values();
  Adam opt(store);
  for (int i = 0; i < 10; ++i) opt.step(store);
  EXPECT_EQ(store.values(), before);
}

TEST(Adam, ConstantGradientStepApproachesLearningRate) {
  ParameterStore store;
  store.add("p", 2, 1);
  Adam opt(store, {0.01, 0.9, 0.999, 1e-8});
  store.grads() << 3.0, -0.5;
  ColVec prev = store.values();
  for (int i = 0; i < 2000; ++i) {
    prev = store.values();
    opt.step(store);
  }
  const ColVec step = store.values() - prev;
  EXPECT_NEAR(step[0], -0.01, 1e-6);
  EXPECT_NEAR(step[1], 0.01, 1e-6);
}

TEST(Adam, MatchesScalarReferenceOverRandomSteps) {
  ParameterStore store;
  store.add("p", 5, 3);
  RngStream rng(12, 0);
  for (auto& v : store.values()) v = rng.uniform(-1, 1);
  std::vector<double> ref(store.values().data(), store.values().data() + store.size());
  Adam opt(store, {0.001, 0.9, 0.999, 1e-8});
  oracle::ScalarAdam scalar{0.001, 0.9, 0.999, 1e-8, {}, {}};
  for (int step = 0; step < 100; ++step) {
    std::vector<double> g(store.size());
    for (auto& x : g) x = rng.uniform(-2, 2);
    for (std::size_t i = 0; i < g.size(); ++i) store.grads()[static_cast<Eigen::Index>(i)] = g[i];
    opt.step(store);
    scalar.step(ref, g);
  }
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(store.values()[static_cast<Eigen::Index>(i)], ref[i], 1e-10);
}

TEST(RmsProp, ZeroGradientFixpointAndStepBound) {
  ParameterStore store;
  store.add("p", 3, 1);
  RmsProp opt(store, {0.01, 0.99, 1e-5});
  opt.step(store);
  EXPECT_EQ(store.values(), ColVec::Zero(3));
  store.grads() << 1.0, -4.0, 0.25;
  for (int i = 0; i < 3000; ++i) {
    const ColVec before = store.values();
    opt.step(store);
    const ColVec step = (store.values() - before).cwiseAbs();
    // v >= (1 - decay) g^2 bounds every step by lr / sqrt(1 - decay).
    ASSERT_LE(step.maxCoeff(), 0.01 / std::sqrt(1 - 0.99) + 1e-12);
  }
  const ColVec before = store.values();
  opt.step(store);
  EXPECT_NEAR(std::abs(store.values()[1] - before[1]), 0.01, 1e-5);
}

TEST(RmsProp, MatchesScalarReference) {
  ParameterStore store;
  store.add("p", 4, 4);
  RngStream rng(13, 0);
  std::vector<double> ref(store.size(), 0.0);
  RmsProp opt(store, {0.002, 0.95, 1e-5});
  oracle::ScalarRmsProp scalar{0.002, 0.95, 1e-5, {}};
  for (int step = 0; step < 100; ++step) {
    std::vector<double> g(store.size());
    for (auto& x : g) x = rng.uniform(-1, 1);
    for (std::size_t i = 0; i < g.size(); ++i) store.grads()[static_cast<Eigen::Index>(i)] = g[i];
    opt.step(store);
    scalar.step(ref, g);
  }
  for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(store.values()[static_cast<Eigen::Index>(i)], ref[i], 1e-10);
}

TEST(ParameterStore, ClipGradNorm) {
  ParameterStore store;
  store.add("p", 2, 1);
  store.grads() << 30.0, 40.0;
  EXPECT_DOUBLE_EQ(store.clip_grad_norm(10.0), 50.0);
  EXPECT_NEAR(store.grads().norm(), 10.0, 1e-12);
}

TEST(Checkpoint, RoundTripsBitExactly) {
  Checkpoint c;
  c.specs = {{"agent", {20, 64, 6, CellType::Recurrent}}, {"critic", {30, 64, 1, CellType::Feedforward}}};
  c.metadata = "[run]\nalgo = qmix\n";
  c.parameters = {0.1, -0.0, 1e-300, 3.141592653589793, -7.5};
  const std::string path = ::testing::TempDir() + "cmarl_ckpt.bin";
  save_checkpoint(path, c);
  const Checkpoint back = load_checkpoint(path);
  EXPECT_EQ(back, c);
  EXPECT_TRUE(std::signbit(back.parameters[1]));
  std::remove(path.c_str());
}

TEST(Checkpoint, RejectsCorruptInput) {
  EXPECT_THROW(decode_checkpoint("garbage"), Error);
  Checkpoint c;
  c.parameters = {1.0, 2.0};
  std::string bytes = encode_checkpoint(c);
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 3)), Error);
  bytes[8] = 9;  // version
  EXPECT_THROW(decode_checkpoint(bytes), Error);
}

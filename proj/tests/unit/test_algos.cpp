#include <gtest/gtest.h>

#include "cmarl/algos/actor_critic.hpp"
#include "cmarl/algos/qmix.hpp"
#include "../oracles/algo_oracles.hpp"
#include "../oracles/nn_oracles.hpp"
#include "../oracles/stats.hpp"

using namespace cmarl;
using namespace cmarl::algos;

namespace {

EnvSpec micro_spec() { return EnvSpec{2, 3, 4, 5, 10}; }

oracle::MicroEpisode micro_episode(std::uint64_t seed, int T, bool terminated) {
  RngStream rng(seed, 3);
  oracle::MicroEpisode e;
  for (int t = 0; t <= T; ++t) {
    std::vector<oracle::Vector> obs;
    for (int i = 0; i < 2; ++i) {
      oracle::Vector o;
      for (int k = 0; k < 4; ++k) o.push_back(rng.uniform(-1, 1));
      obs.push_back(o);
    }
    e.obs.push_back(obs);
    oracle::Vector s;
    for (int k = 0; k < 5; ++k) s.push_back(rng.uniform(-1, 1));
    e.state.push_back(s);
  }
  for (int t = 0; t < T; ++t) {
    e.actions.push_back({static_cast<int>(rng.below(3)), static_cast<int>(rng.below(3))});
    e.rewards.push_back(rng.uniform(-1, 2));
  }
  e.terminated = terminated;
  return e;
}

replay::Episode to_episode(const oracle::MicroEpisode& m) {
  replay::Episode e;
  e.n_agents = 2;
  e.obs_dim = 4;
  e.state_dim = 5;
  e.length = static_cast<int>(m.rewards.size());
  for (const auto& step : m.obs) {
    for (const auto& o : step) e.obs.insert(e.obs.end(), o.begin(), o.end());
  }
  for (const auto& s : m.state) e.state.insert(e.state.end(), s.begin(), s.end());
  for (const auto& a : m.actions) e.actions.insert(e.actions.end(), a.begin(), a.end());
  e.rewards = m.rewards;
  e.terminated.assign(m.rewards.size(), 0);
  if (m.terminated) e.terminated.back() = 1;
  return e;
}

LearnerConfig small_config(Algorithm algo) {
  LearnerConfig c = LearnerConfig::defaults_for(algo);
  c.hidden_dimension = 6;
  c.mixing_network_hidden_dimension = 4;
  c.hypernetwork_dimension = 5;
  c.reward_standardisation = false;
  c.batch_size = 2;
  return c;
}

void randomise(nn::ParameterStore& s, std::uint64_t seed, double scale = 0.5) {
  RngStream rng(seed, 9);
  for (auto& v : s.values()) v = rng.uniform(-scale, scale);
  s.touch();
}

}  // namespace

TEST(Epsilon, LinearScheduleEndpoints) {
  const EpsilonSchedule e;
  EXPECT_EQ(e.at(0), 1.0);
  EXPECT_DOUBLE_EQ(e.at(50000), 0.05);
  EXPECT_DOUBLE_EQ(e.at(25000), 0.525);
  EXPECT_DOUBLE_EQ(e.at(1000000), 0.05);
  EXPECT_EQ(e.at(25000, true), 0.0);
}

TEST(ActionSelection, GreedyWhenEpsilonZero) {
  RngStream rng(1, 0);
  const std::vector<double> q = {0.1, 2.0, -1.0, 2.0};
  for (int k = 0; k < 1000; ++k) ASSERT_EQ(epsilon_greedy(q, 0.0, rng), 1);
}

TEST(ActionSelection, UniformWhenEpsilonOne) {
  RngStream rng(2, 0);
  const std::vector<double> q = {0.1, 2.0, -1.0, 0.5, 0.0};
  std::vector<double> counts(5, 0.0);
  for (int k = 0; k < 100000; ++k) counts[static_cast<std::size_t>(epsilon_greedy(q, 1.0, rng))] += 1;
  EXPECT_GT(oracle::chi_square_uniform_p(counts), 0.01);
}

TEST(ActionSelection, SoftmaxSamplingMatchesLogits) {
  RngStream rng(3, 0);
  const std::vector<double> logits = {0.0, 1.0, -0.5, 2.0};
  std::vector<double> p(4);
  softmax(logits, p);
  std::vector<double> counts(4, 0.0), expected(4);
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) counts[static_cast<std::size_t>(sample_softmax(logits, rng))] += 1;
  for (int a = 0; a < 4; ++a) {
    expected[static_cast<std::size_t>(a)] = p[static_cast<std::size_t>(a)] * draws;
    const double sigma = std::sqrt(draws * p[static_cast<std::size_t>(a)] * (1 - p[static_cast<std::size_t>(a)]));
    EXPECT_LT(std::abs(counts[static_cast<std::size_t>(a)] - expected[static_cast<std::size_t>(a)]), 3 * sigma);
  }
  EXPECT_GT(oracle::chi_square_p(oracle::chi_square(counts, expected), 3), 0.01);
}

TEST(Mixer, ZeroHypernetOutputsLeaveFinalBias) {
  nn::ParameterStore s;
  QMixer mixer({3, 4, 8, 6, 2}, s, "mixer");
  s.value(s.tensor_count() - 1)(0, 0) = 3.7;  // V.2 bias
  RngStream rng(1, 0);
  const nn::Mat q = oracle::random_matrix(rng, 3, 5), st = oracle::random_matrix(rng, 4, 5);
  const nn::Mat out = mixer.forward(s, q, st, nullptr);
  for (Eigen::Index c = 0; c < 5; ++c) EXPECT_EQ(out(0, c), 3.7);
}

TEST(Mixer, ForwardMatchesScalarOracle) {
  nn::ParameterStore s;
  QMixer mixer({3, 4, 8, 6, 2}, s, "mixer");
  RngStream rng(2, 0);
  mixer.init(s, rng);
  const nn::Mat q = oracle::random_matrix(rng, 3, 7, 3.0), st = oracle::random_matrix(rng, 4, 7);
  const nn::Mat out = mixer.forward(s, q, st, nullptr);
  for (Eigen::Index c = 0; c < 7; ++c) {
    const oracle::Vector qs(q.col(c).data(), q.col(c).data() + 3), state(st.col(c).data(), st.col(c).data() + 4);
    EXPECT_NEAR(out(0, c), oracle::mix(s, "mixer", qs, state, 8), 1e-12);
  }
}

TEST(Mixer, GradientsMatchFiniteDifferences) {
  for (int layers : {1, 2}) {
    nn::ParameterStore s;
    QMixer mixer({2, 3, 4, 5, layers}, s, "mixer");
    RngStream rng(3, layers);
    mixer.init(s, rng);
    const nn::Mat q = oracle::random_matrix(rng, 2, 4, 2.0), st = oracle::random_matrix(rng, 3, 4);
    const nn::Mat weights = oracle::random_matrix(rng, 1, 4);
    auto loss = [&]() { return (mixer.forward(s, q, st, nullptr).array() * weights.array()).sum(); };
    s.zero_grad();
    QMixer::Cache cache;
    mixer.forward(s, q, st, &cache);
    const nn::Mat dq = mixer.backward(s, cache, weights);
    EXPECT_LT(oracle::max_relative_error(oracle::numeric_gradient(s, loss), s.grads()), 1e-4);
    nn::Mat qp = q;
    for (Eigen::Index k = 0; k < q.size(); ++k) {
      qp.data()[k] += 1e-6;
      const double up = (mixer.forward(s, qp, st, nullptr).array() * weights.array()).sum();
      qp.data()[k] -= 2e-6;
      const double down = (mixer.forward(s, qp, st, nullptr).array() * weights.array()).sum();
      qp.data()[k] += 1e-6;
      EXPECT_LT(oracle::relative_error((up - down) / 2e-6, dq.data()[k]), 1e-4);
    }
  }
}

TEST(Mixer, MonotoneInEveryAgentUtility) {
  RngStream rng(4, 0);
  for (int draw = 0; draw < 1000; ++draw) {
    nn::ParameterStore s;
    QMixer mixer({3, 4, 8, 6, 2}, s, "mixer");
    for (auto& v : s.values()) v = rng.uniform(-2, 2);
    const nn::Mat q = oracle::random_matrix(rng, 3, 1, 5.0), st = oracle::random_matrix(rng, 4, 1, 2.0);
    QMixer::Cache cache;
    const double base = mixer.forward(s, q, st, &cache)(0, 0);
    const nn::Mat dq = mixer.backward(s, cache, nn::Mat::Ones(1, 1));
    for (int a = 0; a < 3; ++a) {
      ASSERT_GE(dq(a, 0), 0.0);
      nn::Mat up = q;
      up(a, 0) += 1e-3;
      ASSERT_GE(mixer.forward(s, up, st, nullptr)(0, 0), base);
    }
  }
}

TEST(Qmix, HalfMseConventionOnZeroNetwork) {
  LearnerConfig c = small_config(Algorithm::Qmix);
  c.gamma = 0.0;
  QmixLearner learner(c, micro_spec(), 1);
  learner.params().values().setZero();
  learner.params().touch();
  oracle::MicroEpisode m = micro_episode(1, 4, false);
  std::fill(m.rewards.begin(), m.rewards.end(), 1.0);
  const replay::Episode e = to_episode(m);
  const auto batch = replay::EpisodeBatch::pack({&e});
  const std::vector<double> w = {1.0};
  EXPECT_DOUBLE_EQ(learner.compute_loss(batch, w, nullptr), 0.5);
}

namespace {

void set_value_bias(nn::ParameterStore& s, double v) {
  s.value(s.tensor_count() - 1)(0, 0) = v;
  s.touch();
}

double qmix_single_loss(QmixLearner& learner, const oracle::MicroEpisode& m) {
  const replay::Episode e = to_episode(m);
  const std::vector<double> w = {1.0};
  return learner.compute_loss(replay::EpisodeBatch::pack({&e}), w, nullptr);
}

}  // namespace

TEST(Qmix, TerminalStepDropsBootstrap) {
  LearnerConfig c = small_config(Algorithm::Qmix);
  c.gamma = 0.5;
  QmixLearner learner(c, micro_spec(), 2);
  learner.params().values().setZero();
  learner.target_params().values().setZero();
  set_value_bias(learner.params(), 2.0);
  set_value_bias(learner.target_params(), 2.0);
  oracle::MicroEpisode m = micro_episode(2, 1, false);
  m.rewards = {1.0};
  // Q_tot = 2 everywhere: a truncated step targets 1 + 0.5 * 2 = 2, a terminal one targets 1.
  EXPECT_DOUBLE_EQ(qmix_single_loss(learner, m), 0.0);
  m.terminated = true;
  EXPECT_DOUBLE_EQ(qmix_single_loss(learner, m), 0.5);
}

TEST(Qmix, LossMatchesScalarOracle) {
  for (int trial = 0; trial < 6; ++trial) {
    LearnerConfig c = small_config(Algorithm::Qmix);
    c.hypernetwork_layers = 1 + trial % 2;
    QmixLearner learner(c, micro_spec(), 10 + trial);
    randomise(learner.params(), 100 + trial);
    randomise(learner.target_params(), 200 + trial);
    const oracle::MicroEpisode m = micro_episode(trial, 3 + trial, trial % 3 == 0);
    const double expected = oracle::qmix_loss(learner.params(), learner.target_params(), m, 3, 6, 4, c.gamma);
    EXPECT_NEAR(qmix_single_loss(learner, m), expected, 1e-9) << "trial " << trial;
  }
}

TEST(Qmix, PaddingIsExcludedFromLoss) {
  LearnerConfig c = small_config(Algorithm::Qmix);
  QmixLearner learner(c, micro_spec(), 3);
  randomise(learner.params(), 31);
  randomise(learner.target_params(), 32);
  const oracle::MicroEpisode short_ep = micro_episode(5, 2, true), long_ep = micro_episode(6, 6, false);
  const double expected =
      (2 * oracle::qmix_loss(learner.params(), learner.target_params(), short_ep, 3, 6, 4, c.gamma) +
       6 * oracle::qmix_loss(learner.params(), learner.target_params(), long_ep, 3, 6, 4, c.gamma)) / 8.0;
  const replay::Episode a = to_episode(short_ep), b = to_episode(long_ep);
  const std::vector<double> w = {1.0, 1.0};
  EXPECT_NEAR(learner.compute_loss(replay::EpisodeBatch::pack({&a, &b}), w, nullptr), expected, 1e-9);

  // Gradients of the short episode alone are unchanged by the padded tail of
  // a zero-weight companion, up to the shared normaliser.
  const std::vector<double> only_short = {1.0, 0.0};
  learner.compute_loss(replay::EpisodeBatch::pack({&a, &b}), only_short, nullptr);
  const nn::ColVec padded = learner.params().grads();
  const std::vector<double> one = {1.0};
  learner.compute_loss(replay::EpisodeBatch::pack({&a}), one, nullptr);
  const nn::ColVec alone = learner.params().grads() * (2.0 / 8.0);
  EXPECT_LT((padded - alone).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(Qmix, GradientMatchesFiniteDifferences) {
  for (bool double_q : {false, true}) {
    LearnerConfig c = small_config(Algorithm::Qmix);
    c.double_q = double_q;
    QmixLearner learner(c, micro_spec(), 4);
    randomise(learner.params(), 41);
    randomise(learner.target_params(), 42);
    const replay::Episode a = to_episode(micro_episode(7, 3, true)), b = to_episode(micro_episode(8, 5, false));
    const auto batch = replay::EpisodeBatch::pack({&a, &b});
    const std::vector<double> w = {0.7, 1.3};
    learner.compute_loss(batch, w, nullptr);
    const nn::ColVec analytic = learner.params().grads();
    const auto numeric = oracle::numeric_gradient(learner.params(), [&] { return learner.compute_loss(batch, w, nullptr); });
    EXPECT_LT(oracle::max_relative_error(numeric, analytic), 1e-4) << "double_q " << double_q;
  }
}

TEST(Qmix, TargetRefreshesEveryTargetUpdateCalls) {
  LearnerConfig c = small_config(Algorithm::Qmix);
  c.target_update = 200;
  QmixLearner learner(c, micro_spec(), 5);
  const replay::Episode a = to_episode(micro_episode(9, 4, true));
  const auto batch = replay::EpisodeBatch::pack({&a});
  const std::vector<double> w = {1.0};
  const nn::ColVec initial = learner.target_params().values();
  EXPECT_EQ(initial, learner.params().values());
  for (int u = 1; u <= 400; ++u) {
    learner.update(batch, w);
    if (u % 200 == 0) {
      ASSERT_EQ(learner.target_params().values(), learner.params().values()) << u;
    } else if (u < 200) {
      ASSERT_EQ(learner.target_params().values(), initial) << u;
      ASSERT_NE(learner.target_params().values(), learner.params().values()) << u;
    }
  }
  EXPECT_EQ(learner.update_count(), 400);
}

TEST(Qmix, SharedParametersGiveIdenticalUtilitiesForIdenticalInputs) {
  LearnerConfig c = small_config(Algorithm::Qmix);
  c.observation_agent_id = false;
  QmixLearner shared(c, micro_spec(), 6);
  c.share_parameters = false;
  QmixLearner separate(c, micro_spec(), 6);
  EXPECT_GT(separate.params().size(), shared.params().size());
  const std::vector<Vec> obs = {{0.1, -0.2, 0.3, 0.4}, {0.1, -0.2, 0.3, 0.4}};
  RngStream rng(1, 1);
  ActorMemory ms = shared.start_episode(), mp = separate.start_episode();
  shared.act(obs, ms, ActMode::Evaluate, 0, rng, nullptr);
  separate.act(obs, mp, ActMode::Evaluate, 0, rng, nullptr);
  EXPECT_EQ(ms.hidden.col(0), ms.hidden.col(1));
  EXPECT_NE(mp.hidden.col(0), mp.hidden.col(1));
}

TEST(Qmix, GreedyActingIsDeterministicAndExplorationFollowsSchedule) {
  LearnerConfig c = small_config(Algorithm::Qmix);
  QmixLearner learner(c, micro_spec(), 7);
  const std::vector<Vec> obs = {{0.5, 0.1, 0.0, -0.3}, {0.2, 0.2, 0.9, 0.1}};
  RngStream r1(3, 0), r2(4, 0);
  ActorMemory m1 = learner.start_episode(), m2 = learner.start_episode();
  EXPECT_EQ(learner.act(obs, m1, ActMode::Evaluate, 0, r1, nullptr), learner.act(obs, m2, ActMode::Evaluate, 0, r2, nullptr));
  EXPECT_DOUBLE_EQ(learner.epsilon().at(0), 1.0);
  EXPECT_DOUBLE_EQ(learner.epsilon().at(50000), 0.05);
}

TEST(Qmix, ReplayKeepsRawRewardsWhenStandardising) {
  LearnerConfig c = small_config(Algorithm::Qmix);
  c.reward_standardisation = true;
  c.batch_size = 1;
  QmixLearner learner(c, micro_spec(), 8);
  oracle::MicroEpisode m = micro_episode(10, 4, true);
  Rollout r{to_episode(m), {}};
  RngStream rng(1, 2);
  const std::uint64_t before = learner.state_digest();
  learner.train({r}, 4, rng);
  EXPECT_NE(learner.state_digest(), before);
  EXPECT_EQ(learner.buffer().episode(0).rewards, m.rewards);
  EXPECT_GT(learner.reward_stats().count(), 4.0 - 1e-3);
}

TEST(Qmix, PrioritisedReplayUpdatesPriorities) {
  LearnerConfig c = small_config(Algorithm::Qmix);
  c.prioritized_replay = true;
  c.batch_size = 2;
  QmixLearner learner(c, micro_spec(), 9);
  RngStream rng(2, 2);
  for (int k = 0; k < 3; ++k) learner.train({Rollout{to_episode(micro_episode(20 + k, 3, true)), {}}}, 3 * (k + 1), rng);
  bool changed = false;
  for (std::uint64_t id = 0; id < 3; ++id) changed = changed || learner.buffer().priority(id) != 1.0;
  EXPECT_TRUE(changed);
}

TEST(NStep, GammaZeroReturnsRewards) {
  const std::vector<double> rewards = {1, 2, 3, 4, 5, 6}, values(8, 5.0);
  const std::vector<std::uint8_t> terminated = {0, 0, 1, 0, 0, 0};
  const std::vector<int> lengths = {3, 3};
  const auto g = nstep_targets(rewards, values, terminated, lengths, 3, 0.0, 5);
  for (std::size_t k = 0; k < 6; ++k) EXPECT_EQ(g[k], rewards[k]);
}

TEST(NStep, MatchesScalarOracleWithPadding) {
  RngStream rng(11, 0);
  for (int trial = 0; trial < 200; ++trial) {
    const int B = 1 + static_cast<int>(rng.below(4)), T = 1 + static_cast<int>(rng.below(9));
    const int n = 1 + static_cast<int>(rng.below(6));
    const double gamma = rng.uniform(0.0, 1.0);
    std::vector<double> r(static_cast<std::size_t>(B * T), 0.0), v(static_cast<std::size_t>(B * (T + 1)));
    std::vector<std::uint8_t> term(static_cast<std::size_t>(B * T), 0);
    std::vector<int> len(static_cast<std::size_t>(B));
    for (auto& x : v) x = rng.uniform(-3, 3);
    for (int b = 0; b < B; ++b) {
      len[static_cast<std::size_t>(b)] = 1 + static_cast<int>(rng.below(static_cast<std::uint32_t>(T)));
      for (int t = 0; t < len[static_cast<std::size_t>(b)]; ++t) r[static_cast<std::size_t>(b * T + t)] = rng.uniform(-1, 1);
      if (rng.bernoulli(0.5)) term[static_cast<std::size_t>(b * T + len[static_cast<std::size_t>(b)] - 1)] = 1;
    }
    const auto g = nstep_targets(r, v, term, len, T, gamma, n);
    for (int b = 0; b < B; ++b) {
      const int L = len[static_cast<std::size_t>(b)];
      // The tail bootstrap reads V at the episode's own length.
      oracle::Vector rb(r.begin() + b * T, r.begin() + b * T + L), vb(v.begin() + b * (T + 1), v.begin() + b * (T + 1) + L + 1);
      const auto expected = oracle::nstep(rb, vb, term[static_cast<std::size_t>(b * T + L - 1)] != 0, gamma, n);
      for (int t = 0; t < T; ++t) {
        const double want = t < L ? expected[static_cast<std::size_t>(t)] : 0.0;
        ASSERT_NEAR(g[static_cast<std::size_t>(b * T + t)], want, 1e-12);
      }
    }
  }
}

TEST(PolicyLosses, ZeroAdvantageLeavesPureEntropyGradient) {
  RngStream rng(12, 0);
  const nn::Mat logits = oracle::random_matrix(rng, 4, 6, 2.0);
  const std::vector<int> actions = {0, 1, 2, 3, 0, 1};
  const std::vector<double> adv(6, 0.0);
  const std::vector<std::uint8_t> mask(6, 1);
  const PolicyLoss l = actor_critic_policy_loss(logits, actions, adv, mask, 0.01);
  EXPECT_EQ(l.surrogate, 0.0);
  // d(-c * mean H)/dz = c/M * p * (log p + H)
  const nn::Mat p = softmax_columns(logits), lp = log_softmax_columns(logits);
  for (Eigen::Index col = 0; col < 6; ++col) {
    const double h = -(p.col(col).array() * lp.col(col).array()).sum();
    for (Eigen::Index a = 0; a < 4; ++a) {
      EXPECT_NEAR(l.dlogits(a, col), 0.01 / 6.0 * p(a, col) * (lp(a, col) + h), 1e-15);
    }
  }
}

TEST(PolicyLosses, PpoWithUnitRatioHasActorCriticGradient) {
  RngStream rng(13, 0);
  const nn::Mat logits = oracle::random_matrix(rng, 5, 8, 2.0);
  std::vector<int> actions;
  std::vector<double> adv, old;
  std::vector<std::uint8_t> mask;
  for (int c = 0; c < 8; ++c) {
    actions.push_back(static_cast<int>(rng.below(5)));
    adv.push_back(rng.uniform(-2, 2));
    mask.push_back(c < 6 ? 1 : 0);
    old.push_back(log_softmax_at(std::span<const double>(logits.col(c).data(), 5), actions.back()));
  }
  const PolicyLoss a2c = actor_critic_policy_loss(logits, actions, adv, mask, 0.01);
  const PolicyLoss ppo = ppo_policy_loss(logits, actions, old, adv, mask, 0.2, 0.01);
  // Same gradient; the surrogate value itself is -mean(A) rather than -mean(A log pi).
  double mean_adv = 0;
  for (int c = 0; c < 6; ++c) mean_adv += adv[static_cast<std::size_t>(c)] / 6.0;
  EXPECT_NEAR(ppo.surrogate, -mean_adv, 1e-12);
  EXPECT_NEAR(a2c.entropy, ppo.entropy, 1e-12);
  EXPECT_LT((a2c.dlogits - ppo.dlogits).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_EQ(ppo.clip_fraction, 0.0);
}

TEST(PolicyLosses, ClippedRatioPassesNoSurrogateGradient) {
  RngStream rng(14, 0);
  const nn::Mat logits = oracle::random_matrix(rng, 3, 4, 1.0);
  const std::vector<int> actions = {0, 1, 2, 1};
  std::vector<double> old;
  for (int c = 0; c < 4; ++c) old.push_back(log_softmax_at(std::span<const double>(logits.col(c).data(), 3), actions[static_cast<std::size_t>(c)]) - std::log(2.0));
  const std::vector<double> adv = {1.0, 0.5, 2.0, 3.0};
  const std::vector<std::uint8_t> mask(4, 1);
  const PolicyLoss l = ppo_policy_loss(logits, actions, old, adv, mask, 0.2, 0.0);
  EXPECT_EQ(l.dlogits.lpNorm<Eigen::Infinity>(), 0.0);
  EXPECT_NEAR(l.surrogate, -1.2 * (1.0 + 0.5 + 2.0 + 3.0) / 4.0, 1e-12);
  EXPECT_EQ(l.clip_fraction, 1.0);
}

TEST(PolicyLosses, GradientsMatchFiniteDifferences) {
  RngStream rng(15, 0);
  nn::Mat logits = oracle::random_matrix(rng, 4, 7, 1.5);
  std::vector<int> actions;
  std::vector<double> adv, old;
  std::vector<std::uint8_t> mask;
  for (int c = 0; c < 7; ++c) {
    actions.push_back(static_cast<int>(rng.below(4)));
    adv.push_back(rng.uniform(-2, 2));
    mask.push_back(c == 3 ? 0 : 1);
    old.push_back(log_softmax_at(std::span<const double>(logits.col(c).data(), 4), actions.back()) + rng.uniform(-0.5, 0.5));
  }
  for (bool clipped : {false, true}) {
    auto eval = [&](const nn::Mat& z) {
      return clipped ? ppo_policy_loss(z, actions, old, adv, mask, 0.2, 0.05) : actor_critic_policy_loss(z, actions, adv, mask, 0.05);
    };
    const nn::Mat d = eval(logits).dlogits;
    for (Eigen::Index k = 0; k < logits.size(); ++k) {
      nn::Mat z = logits;
      z.data()[k] += 1e-6;
      const double up = eval(z).loss;
      z.data()[k] -= 2e-6;
      const double down = eval(z).loss;
      EXPECT_LT(oracle::relative_error((up - down) / 2e-6, d.data()[k]), 1e-5) << clipped << " " << k;
    }
  }
}

namespace {

Rollout micro_rollout(const oracle::MicroEpisode& m, const std::vector<oracle::Vector>& old) {
  Rollout r{to_episode(m), {}};
  for (const auto& step : old) r.behavior_log_probs.insert(r.behavior_log_probs.end(), step.begin(), step.end());
  return r;
}

std::vector<oracle::Vector> perturbed_log_probs(const nn::ParameterStore& actor, const oracle::MicroEpisode& m, int hidden,
                                                RngStream& rng) {
  const auto logits = oracle::agent_outputs(actor, m, 3, hidden);
  std::vector<oracle::Vector> old;
  for (std::size_t t = 0; t < m.rewards.size(); ++t) {
    oracle::Vector step;
    for (std::size_t i = 0; i < 2; ++i) {
      step.push_back(oracle::log_softmax(logits[t][i])[static_cast<std::size_t>(m.actions[t][i])] + rng.uniform(-0.4, 0.4));
    }
    old.push_back(step);
  }
  return old;
}

}  // namespace

TEST(ActorCritic, LossesMatchScalarOracle) {
  for (Algorithm algo : {Algorithm::Maa2c, Algorithm::Mappo}) {
    for (int trial = 0; trial < 4; ++trial) {
      LearnerConfig c = small_config(algo);
      c.n_step = 1 + trial;
      ActorCriticLearner learner(c, micro_spec(), 20 + trial);
      randomise(learner.actor_params(), 300 + trial);
      randomise(learner.critic_params(), 400 + trial);
      randomise(learner.target_critic_params(), 500 + trial);
      const oracle::MicroEpisode m = micro_episode(30 + trial, 3 + trial, trial % 2 == 0);
      RngStream rng(trial, 5);
      const auto old = algo == Algorithm::Mappo ? perturbed_log_probs(learner.actor_params(), m, 6, rng)
                                                : std::vector<oracle::Vector>{};
      const auto expected = oracle::actor_critic_losses(learner.actor_params(), learner.critic_params(),
                                                        learner.target_critic_params(), m, 3, 6, c.gamma, c.n_step,
                                                        c.entropy_coefficient, old, c.clip);
      const ActorCriticBatch data = learner.prepare({micro_rollout(m, old)});
      const ActorCriticLosses l = learner.compute_losses(data, false);
      EXPECT_NEAR(l.policy.loss, expected.policy, 1e-9);
      EXPECT_NEAR(l.value.loss, expected.value, 1e-9);
      EXPECT_NEAR(l.policy.entropy, expected.entropy, 1e-9);
    }
  }
}

TEST(ActorCritic, GammaZeroTargetsAreRewards) {
  LearnerConfig c = small_config(Algorithm::Maa2c);
  c.gamma = 0.0;
  ActorCriticLearner learner(c, micro_spec(), 21);
  randomise(learner.target_critic_params(), 22);
  const oracle::MicroEpisode m = micro_episode(40, 5, false);
  const ActorCriticBatch data = learner.prepare({micro_rollout(m, {})});
  for (std::size_t t = 0; t < 5; ++t) EXPECT_EQ(data.returns[t], m.rewards[t]);
}

TEST(ActorCritic, GradientsMatchFiniteDifferences) {
  for (Algorithm algo : {Algorithm::Maa2c, Algorithm::Mappo}) {
    LearnerConfig c = small_config(algo);
    ActorCriticLearner learner(c, micro_spec(), 23);
    randomise(learner.actor_params(), 24);
    randomise(learner.critic_params(), 25);
    randomise(learner.target_critic_params(), 26);
    RngStream rng(27, 0);
    const oracle::MicroEpisode a = micro_episode(41, 3, true), b = micro_episode(42, 5, false);
    const ActorCriticBatch data = learner.prepare({micro_rollout(a, perturbed_log_probs(learner.actor_params(), a, 6, rng)),
                                                   micro_rollout(b, perturbed_log_probs(learner.actor_params(), b, 6, rng))});
    learner.compute_losses(data, true);
    const nn::ColVec actor_grad = learner.actor_params().grads(), critic_grad = learner.critic_params().grads();
    const auto actor_numeric =
        oracle::numeric_gradient(learner.actor_params(), [&] { return learner.compute_losses(data, false).policy.loss; });
    const auto critic_numeric =
        oracle::numeric_gradient(learner.critic_params(), [&] { return learner.compute_losses(data, false).value.loss; });
    EXPECT_LT(oracle::max_relative_error(actor_numeric, actor_grad), 1e-4);
    EXPECT_LT(oracle::max_relative_error(critic_numeric, critic_grad), 1e-4);
  }
}

TEST(ActorCritic, TrainAppliesEpochsAndRefreshesTarget) {
  LearnerConfig c = small_config(Algorithm::Mappo);
  c.target_update = 3;
  ActorCriticLearner learner(c, micro_spec(), 28);
  RngStream rng(29, 0);
  const oracle::MicroEpisode m = micro_episode(43, 4, true);
  const nn::ColVec target0 = learner.target_critic_params().values();
  for (int u = 1; u <= 3; ++u) {
    const auto old = perturbed_log_probs(learner.actor_params(), m, 6, rng);
    const TrainStats s = learner.train({micro_rollout(m, old)}, u * 4, rng);
    EXPECT_TRUE(s.updated);
    if (u < 3) EXPECT_EQ(learner.target_critic_params().values(), target0);
  }
  EXPECT_EQ(learner.target_critic_params().values(), learner.critic_params().values());
  EXPECT_EQ(learner.update_count(), 3);

  // Two episodes per call: the copy happens on the second call (4 >= 3 episodes).
  const nn::ColVec target3 = learner.target_critic_params().values();
  learner.train({micro_rollout(m, perturbed_log_probs(learner.actor_params(), m, 6, rng)),
                 micro_rollout(m, perturbed_log_probs(learner.actor_params(), m, 6, rng))}, 20, rng);
  EXPECT_EQ(learner.target_critic_params().values(), target3);
  learner.train({micro_rollout(m, perturbed_log_probs(learner.actor_params(), m, 6, rng)),
                 micro_rollout(m, perturbed_log_probs(learner.actor_params(), m, 6, rng))}, 24, rng);
  EXPECT_EQ(learner.target_critic_params().values(), learner.critic_params().values());
}

TEST(ActorCritic, MappoRejectsMissingBehaviourLogProbs) {
  ActorCriticLearner learner(small_config(Algorithm::Mappo), micro_spec(), 30);
  try {
    learner.prepare({micro_rollout(micro_episode(44, 3, true), {})});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimMismatch);
  }
}

TEST(ActorCritic, ActingReturnsLogProbsOfChosenActions) {
  ActorCriticLearner learner(small_config(Algorithm::Maa2c), micro_spec(), 31);
  const std::vector<Vec> obs = {{0.5, 0.1, 0.0, -0.3}, {0.2, 0.2, 0.9, 0.1}};
  RngStream rng(32, 0);
  ActorMemory m = learner.start_episode();
  std::vector<double> lp;
  const auto actions = learner.act(obs, m, ActMode::Explore, 0, rng, &lp);
  ASSERT_EQ(lp.size(), 2u);
  const oracle::MicroEpisode single{{{obs[0], obs[1]}}, {}, {}, {}, false};
  const auto logits = oracle::agent_outputs(learner.actor_params(), single, 3, 6);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(lp[i], oracle::log_softmax(logits[0][i])[static_cast<std::size_t>(actions[i])], 1e-12);
  }
}

TEST(RewardStats, TracksPooledMomentsAndPreservesOrder) {
  RngStream rng(33, 0);
  RunningMeanStd stats;
  std::vector<double> all;
  for (int batch = 0; batch < 20; ++batch) {
    std::vector<double> xs;
    for (int k = 0; k < 1 + static_cast<int>(rng.below(30)); ++k) xs.push_back(rng.uniform(-2, 5));
    stats.update(xs);
    all.insert(all.end(), xs.begin(), xs.end());
  }
  double mean = 0;
  for (double x : all) mean += x;
  mean /= static_cast<double>(all.size());
  double var = 0;
  for (double x : all) var += (x - mean) * (x - mean);
  var /= static_cast<double>(all.size());
  EXPECT_NEAR(stats.mean(), mean, 1e-5);
  EXPECT_NEAR(stats.var(), var, 1e-4);
  EXPECT_NEAR(stats.count(), static_cast<double>(all.size()), 1e-3);
  for (int k = 0; k < 100; ++k) {
    const double a = rng.uniform(-10, 10), b = rng.uniform(-10, 10);
    EXPECT_EQ(a < b, stats.standardise(a) < stats.standardise(b));
  }
}

TEST(Config, DefaultsFollowTables) {
  const LearnerConfig q = LearnerConfig::defaults_for(Algorithm::Qmix);
  EXPECT_EQ(q.batch_size, 32);
  EXPECT_EQ(q.buffer_size, 5000);
  EXPECT_EQ(q.target_update, 200);
  EXPECT_TRUE(q.reward_standardisation);
  const LearnerConfig a2c = LearnerConfig::defaults_for(Algorithm::Maa2c);
  EXPECT_EQ(a2c.batch_size, 10);
  EXPECT_EQ(a2c.parallel_runners, 10);
  EXPECT_EQ(a2c.epochs, 1);
  const LearnerConfig ppo = LearnerConfig::defaults_for(Algorithm::Mappo);
  EXPECT_EQ(ppo.epochs, 4);
  EXPECT_DOUBLE_EQ(ppo.clip, 0.2);
  EXPECT_EQ(parse_algorithm("mappo"), Algorithm::Mappo);
  EXPECT_EQ(algorithm_name(Algorithm::Maa2c), "maa2c");
}

TEST(Config, SetParsesAndRejects) {
  LearnerConfig c;
  c.set("gamma", "0.95");
  c.set("share_parameters", "False");
  c.set("batch_size", "16");
  EXPECT_DOUBLE_EQ(c.gamma, 0.95);
  EXPECT_FALSE(c.share_parameters);
  EXPECT_EQ(c.fields().at("batch_size"), "16");
  for (const auto& [name, value] : std::vector<std::pair<std::string, std::string>>{
           {"no_such_field", "1"}, {"batch_size", "1.5"}, {"gamma", "abc"}, {"double_q", "maybe"}}) {
    try {
      c.set(name, value);
      FAIL() << name;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::BadConfig);
    }
  }
  LearnerConfig round;
  for (const auto& [name, value] : c.fields()) round.set(name, value);
  EXPECT_EQ(round.fields(), c.fields());
}

TEST(Learners, CheckpointRoundTripRestoresPolicy) {
  for (Algorithm algo : {Algorithm::Qmix, Algorithm::Maa2c, Algorithm::Mappo}) {
    const LearnerConfig c = small_config(algo);
    auto a = make_learner(c, micro_spec(), 50);
    auto b = make_learner(c, micro_spec(), 51);
    ASSERT_NE(a->state_digest(), b->state_digest());
    const nn::Checkpoint bytes = nn::decode_checkpoint(nn::encode_checkpoint(a->checkpoint("meta")));
    EXPECT_EQ(bytes.metadata, "meta");
    b->load(bytes);
    const std::vector<Vec> obs = {{0.5, 0.1, 0.0, -0.3}, {0.2, 0.2, 0.9, 0.1}};
    ActorMemory ma = a->start_episode(), mb = b->start_episode();
    RngStream ra(1, 0), rb(1, 0);
    for (int t = 0; t < 5; ++t) {
      std::vector<double> la, lb;
      ASSERT_EQ(a->act(obs, ma, ActMode::Explore, 100, ra, &la), b->act(obs, mb, ActMode::Explore, 100, rb, &lb));
      ASSERT_EQ(la, lb);
    }
  }
}

#include "cmarl/algos/qmix.hpp"

#include <cmath>

#include "cmarl/core/errors.hpp"

namespace cmarl::algos {

namespace {

replay::ReplayConfig replay_config(const LearnerConfig& c) {
  replay::ReplayConfig r;
  r.capacity = static_cast<std::size_t>(c.buffer_size);
  r.prioritized = c.prioritized_replay;
  r.alpha = c.per_alpha;
  r.beta_start = c.per_beta_start;
  r.beta_end = c.per_beta_end;
  r.eps = c.per_eps;
  return r;
}

}  // namespace

QmixLearner::QmixLearner(const LearnerConfig& config, const EnvSpec& env, std::uint64_t seed)
    : Learner(config, env), buffer_(replay_config(config)) {
  register_parameters(online_, agents_, mixer_);
  AgentPool target_agents;
  QMixer target_mixer;
  register_parameters(target_, target_agents, target_mixer);
  RngStream rng(seed, 0x51);
  agents_.init(online_, rng);
  mixer_.init(online_, rng);
  target_.copy_values_from(online_);
  if (config.optimizer == "rmsprop") {
    rmsprop_.emplace(online_, nn::RmsPropConfig{config.learning_rate, 0.99, 1e-5});
  } else {
    adam_.emplace(online_, nn::AdamConfig{config.learning_rate});
  }
  epsilon_ = {config.epsilon_start, config.epsilon_finish, config.epsilon_anneal, config.evaluation_epsilon};
}

void QmixLearner::register_parameters(nn::ParameterStore& store, AgentPool& agents, QMixer& mixer) const {
  const nn::NetSpec spec{inputs_.dim(), config_.hidden_dimension, env_.n_actions, nn::CellType::Recurrent};
  agents = AgentPool(spec, env_.n_agents, config_.share_parameters, store, "agent");
  mixer = QMixer({env_.n_agents, env_.state_dim, config_.mixing_network_hidden_dimension,
                  config_.hypernetwork_dimension, config_.hypernetwork_layers},
                 store, "mixer");
}

std::vector<int> QmixLearner::act(const std::vector<Vec>& obs, ActorMemory& memory, ActMode mode,
                                  std::int64_t t_env, RngStream& rng, std::vector<double>* log_probs) const {
  const nn::Mat q = agent_outputs(agents_, online_, obs, memory);
  const double eps = epsilon_.at(t_env, mode == ActMode::Evaluate);
  std::vector<int> actions(static_cast<std::size_t>(env_.n_agents));
  for (int i = 0; i < env_.n_agents; ++i) {
    actions[static_cast<std::size_t>(i)] =
        epsilon_greedy(std::span<const double>(q.col(i).data(), static_cast<std::size_t>(q.rows())), eps, rng);
  }
  if (log_probs) log_probs->clear();
  memory.last_actions = actions;
  return actions;
}

TrainStats QmixLearner::train(std::vector<Rollout> rollouts, std::int64_t t_env, RngStream& rng) {
  for (Rollout& r : rollouts) buffer_.insert(std::move(r.episode));
  last_t_env_ = t_env;
  TrainStats stats;
  if (!buffer_.ready(static_cast<std::size_t>(config_.batch_size))) return stats;
  const double progress = horizon_ > 0 ? static_cast<double>(t_env) / static_cast<double>(horizon_) : 0.0;
  const replay::SampledBatch s = buffer_.sample(static_cast<std::size_t>(config_.batch_size), buffer_.beta_at(progress), rng);
  std::vector<double> td;
  stats = update(s.batch, s.weights, &td);
  if (config_.prioritized_replay) buffer_.update_priorities(s.ids, td);
  return stats;
}

double QmixLearner::compute_loss(const replay::EpisodeBatch& batch, std::span<const double> weights,
                                 std::vector<double>* episode_td) {
  const int B = batch.batch, T = batch.max_len, N = env_.n_agents, A = env_.n_actions;
  if (batch.n_agents != N || batch.obs_dim != env_.obs_dim || batch.state_dim != env_.state_dim) {
    raise(ErrorCode::DimMismatch, "batch does not match the learner's environment");
  }
  if (static_cast<int>(weights.size()) != B) raise(ErrorCode::DimMismatch, "one importance weight per episode");
  const Eigen::Index cols = static_cast<Eigen::Index>(B) * N;
  const Eigen::Index M = static_cast<Eigen::Index>(B) * T;  // mixer column = b * T + t

  // Online utilities for t < T (taped), plus t = T when double Q needs it.
  std::vector<AgentPool::Tape> tapes(static_cast<std::size_t>(T));
  std::vector<nn::Mat> online_q(static_cast<std::size_t>(T + 1));
  nn::Mat h = agents_.initial_hidden(cols), next;
  for (int t = 0; t < T; ++t) {
    online_q[static_cast<std::size_t>(t)] = agents_.forward(online_, batch_inputs(batch, t), h, next, &tapes[static_cast<std::size_t>(t)]);
    h = next;
  }
  if (config_.double_q) online_q[static_cast<std::size_t>(T)] = agents_.forward(online_, batch_inputs(batch, T), h, next, nullptr);

  // Target utilities for t = 1..T (hidden state rolled from t = 0).
  nn::Mat next_q(N, M);
  nn::Mat ht = agents_.initial_hidden(cols);
  for (int t = 0; t <= T; ++t) {
    const nn::Mat q = agents_.forward(target_, batch_inputs(batch, t), ht, next, nullptr);
    ht = next;
    if (t == 0) continue;
    for (int b = 0; b < B; ++b) {
      for (int i = 0; i < N; ++i) {
        const Eigen::Index c = static_cast<Eigen::Index>(b) * N + i;
        double v;
        if (config_.double_q) {
          const nn::Mat& oq = online_q[static_cast<std::size_t>(t)];
          v = q(argmax(std::span<const double>(oq.col(c).data(), static_cast<std::size_t>(A))), c);
        } else {
          v = q.col(c).maxCoeff();
        }
        next_q(i, static_cast<Eigen::Index>(b) * T + (t - 1)) = v;
      }
    }
  }

  nn::Mat chosen(N, M), states(env_.state_dim, M), next_states(env_.state_dim, M);
  for (int b = 0; b < B; ++b) {
    for (int t = 0; t < T; ++t) {
      const Eigen::Index m = static_cast<Eigen::Index>(b) * T + t;
      for (int i = 0; i < N; ++i) chosen(i, m) = online_q[static_cast<std::size_t>(t)](batch.action(b, t, i), static_cast<Eigen::Index>(b) * N + i);
      states.col(m) = Eigen::Map<const nn::ColVec>(batch.state_at(b, t), env_.state_dim);
      next_states.col(m) = Eigen::Map<const nn::ColVec>(batch.state_at(b, t + 1), env_.state_dim);
    }
  }

  QMixer::Cache cache;
  const nn::Mat q_tot = mixer_.forward(online_, chosen, states, &cache);
  const nn::Mat q_tot_next = mixer_.forward(target_, next_q, next_states, nullptr);

  if (config_.reward_standardisation) {
    std::vector<double> valid;
    for (std::size_t k = 0; k < batch.rewards.size(); ++k) {
      if (batch.mask[k]) valid.push_back(batch.rewards[k]);
    }
    reward_stats_.update(valid);
  }
  std::vector<double> targets(static_cast<std::size_t>(M)), q(static_cast<std::size_t>(M));
  for (Eigen::Index m = 0; m < M; ++m) {
    const auto k = static_cast<std::size_t>(m);
    const double r = config_.reward_standardisation ? reward_stats_.standardise(batch.rewards[k]) : batch.rewards[k];
    targets[k] = r + config_.gamma * (1.0 - batch.terminated[k]) * q_tot_next(0, m);
    q[k] = q_tot(0, m);
  }
  const TdLoss loss = td_loss(q, targets, batch.mask, weights, T);

  if (episode_td) {
    episode_td->assign(static_cast<std::size_t>(B), 0.0);
    for (int b = 0; b < B; ++b) {
      double s = 0;
      for (int t = 0; t < batch.lengths[static_cast<std::size_t>(b)]; ++t) s += std::abs(loss.td_errors[batch.step_index(b, t)]);
      (*episode_td)[static_cast<std::size_t>(b)] = s / batch.lengths[static_cast<std::size_t>(b)];
    }
  }

  online_.zero_grad();
  const nn::Mat dq_tot = Eigen::Map<const nn::Mat>(loss.dq.data(), 1, M);
  const nn::Mat dchosen = mixer_.backward(online_, cache, dq_tot);
  nn::Mat dh_carry;
  for (int t = T - 1; t >= 0; --t) {
    nn::Mat dout = nn::Mat::Zero(A, cols);
    for (int b = 0; b < B; ++b) {
      for (int i = 0; i < N; ++i) {
        dout(batch.action(b, t, i), static_cast<Eigen::Index>(b) * N + i) = dchosen(i, static_cast<Eigen::Index>(b) * T + t);
      }
    }
    nn::Mat dh_in;
    agents_.backward(online_, tapes[static_cast<std::size_t>(t)], dout, dh_carry.size() ? &dh_carry : nullptr, &dh_in);
    dh_carry = std::move(dh_in);
  }
  return loss.loss;
}

TrainStats QmixLearner::update(const replay::EpisodeBatch& batch, std::span<const double> weights,
                               std::vector<double>* episode_td) {
  TrainStats stats;
  stats.values["loss"] = compute_loss(batch, weights, episode_td);
  stats.values["grad_norm"] = online_.clip_grad_norm(config_.grad_norm_clip);
  if (adam_) adam_->step(online_);
  if (rmsprop_) rmsprop_->step(online_);
  ++updates_;
  if (updates_ % config_.target_update == 0) target_.copy_values_from(online_);
  stats.updated = true;
  return stats;
}

nn::Checkpoint QmixLearner::checkpoint(const std::string& metadata) const {
  nn::Checkpoint c;
  c.specs.push_back({"agent", agents_.spec()});
  c.specs.push_back({"mixer", {env_.state_dim, config_.hypernetwork_dimension, config_.mixing_network_hidden_dimension,
                               nn::CellType::Feedforward}});
  c.metadata = metadata;
  c.parameters.assign(online_.values().data(), online_.values().data() + online_.size());
  return c;
}

void QmixLearner::load(const nn::Checkpoint& c) {
  if (c.parameters.size() != online_.size()) raise(ErrorCode::DimMismatch, "checkpoint does not fit this learner");
  if (c.specs.empty() || !(c.specs[0].spec == agents_.spec())) raise(ErrorCode::DimMismatch, "agent spec differs");
  online_.values() = Eigen::Map<const nn::ColVec>(c.parameters.data(), static_cast<Eigen::Index>(c.parameters.size()));
  online_.touch();
  target_.copy_values_from(online_);
}

std::uint64_t QmixLearner::state_digest() const {
  std::uint64_t h = fnv1a(online_.values().data(), online_.size() * sizeof(double));
  h = fnv1a(target_.values().data(), target_.size() * sizeof(double), h);
  const double stats[3] = {reward_stats_.mean(), reward_stats_.var(), reward_stats_.count()};
  h = fnv1a(stats, sizeof stats, h);
  const std::uint64_t counters[3] = {buffer_.inserted(), static_cast<std::uint64_t>(updates_),
                                     static_cast<std::uint64_t>(adam_ ? adam_->steps() : 0)};
  return fnv1a(counters, sizeof counters, h);
}

}  // namespace cmarl::algos

#include "cmarl/algos/actor_critic.hpp"

#include <cmath>

#include "cmarl/core/errors.hpp"

namespace cmarl::algos {

ActorCriticLearner::ActorCriticLearner(const LearnerConfig& config, const EnvSpec& env, std::uint64_t seed)
    : Learner(config, env) {
  const nn::NetSpec actor_spec{inputs_.dim(), config.hidden_dimension, env.n_actions, nn::CellType::Recurrent};
  agents_ = AgentPool(actor_spec, env.n_agents, config.share_parameters, actor_, "agent");
  const nn::NetSpec critic_spec{env.state_dim, config.hidden_dimension, 1, nn::CellType::Feedforward};
  critic_net_ = nn::Network(critic_spec, critic_, "critic");
  nn::Network mirror(critic_spec, target_critic_, "critic");
  RngStream rng(seed, 0xac);
  agents_.init(actor_, rng);
  critic_net_.init(critic_, rng);
  target_critic_.copy_values_from(critic_);
  if (config.optimizer == "rmsprop") {
    actor_rms_.emplace(actor_, nn::RmsPropConfig{config.learning_rate, 0.99, 1e-5});
    critic_rms_.emplace(critic_, nn::RmsPropConfig{config.learning_rate, 0.99, 1e-5});
  } else {
    actor_adam_.emplace(actor_, nn::AdamConfig{config.learning_rate});
    critic_adam_.emplace(critic_, nn::AdamConfig{config.learning_rate});
  }
}

std::vector<int> ActorCriticLearner::act(const std::vector<Vec>& obs, ActorMemory& memory, ActMode mode,
                                         std::int64_t, RngStream& rng, std::vector<double>* log_probs) const {
  const nn::Mat logits = agent_outputs(agents_, actor_, obs, memory);
  std::vector<int> actions(static_cast<std::size_t>(env_.n_agents));
  if (log_probs) log_probs->assign(static_cast<std::size_t>(env_.n_agents), 0.0);
  for (int i = 0; i < env_.n_agents; ++i) {
    const std::span<const double> col(logits.col(i).data(), static_cast<std::size_t>(logits.rows()));
    const int a = mode == ActMode::Evaluate ? argmax(col) : sample_softmax(col, rng);
    actions[static_cast<std::size_t>(i)] = a;
    if (log_probs) (*log_probs)[static_cast<std::size_t>(i)] = log_softmax_at(col, a);
  }
  memory.last_actions = actions;
  return actions;
}

ActorCriticBatch ActorCriticLearner::prepare(const std::vector<Rollout>& rollouts) {
  if (rollouts.empty()) raise(ErrorCode::Underfilled, "no rollouts to train on");
  std::vector<const replay::Episode*> eps;
  for (const Rollout& r : rollouts) eps.push_back(&r.episode);
  ActorCriticBatch d;
  d.batch = replay::EpisodeBatch::pack(eps);
  const replay::EpisodeBatch& b = d.batch;
  const int B = b.batch, T = b.max_len, N = env_.n_agents;

  d.rewards = b.rewards;
  if (config_.reward_standardisation) {
    std::vector<double> valid;
    for (std::size_t k = 0; k < b.rewards.size(); ++k) {
      if (b.mask[k]) valid.push_back(b.rewards[k]);
    }
    reward_stats_.update(valid);
    for (std::size_t k = 0; k < d.rewards.size(); ++k) d.rewards[k] = b.mask[k] ? reward_stats_.standardise(b.rewards[k]) : 0.0;
  }

  nn::Mat states(env_.state_dim, static_cast<Eigen::Index>(B) * (T + 1));
  for (int e = 0; e < B; ++e) {
    for (int t = 0; t <= T; ++t) {
      states.col(static_cast<Eigen::Index>(e) * (T + 1) + t) = Eigen::Map<const nn::ColVec>(b.state_at(e, t), env_.state_dim);
    }
  }
  const nn::Mat v = critic_net_.forward(target_critic_, states, nullptr, nullptr, nullptr);
  d.target_values.assign(v.data(), v.data() + v.size());
  d.returns = nstep_targets(d.rewards, d.target_values, b.terminated, b.lengths, T, config_.gamma, config_.n_step);

  d.old_log_probs.assign(static_cast<std::size_t>(T) * B * N, 0.0);
  for (int e = 0; e < B; ++e) {
    const auto& lp = rollouts[static_cast<std::size_t>(e)].behavior_log_probs;
    const int L = b.lengths[static_cast<std::size_t>(e)];
    if (clipped() && lp.size() != static_cast<std::size_t>(L) * N) {
      raise(ErrorCode::DimMismatch, "rollout lacks behaviour log-probs");
    }
    if (lp.empty()) continue;
    for (int t = 0; t < L; ++t) {
      for (int i = 0; i < N; ++i) {
        d.old_log_probs[(static_cast<std::size_t>(t) * B + e) * N + i] = lp[static_cast<std::size_t>(t) * N + i];
      }
    }
  }
  return d;
}

ActorCriticLosses ActorCriticLearner::compute_losses(const ActorCriticBatch& d, bool backprop) {
  const replay::EpisodeBatch& b = d.batch;
  const int B = b.batch, T = b.max_len, N = env_.n_agents, A = env_.n_actions;
  const Eigen::Index cols = static_cast<Eigen::Index>(B) * N;
  ActorCriticLosses out;

  // Critic on s_t, t < T; column = e * T + t.
  nn::Mat states(env_.state_dim, static_cast<Eigen::Index>(B) * T);
  for (int e = 0; e < B; ++e) {
    for (int t = 0; t < T; ++t) {
      states.col(static_cast<Eigen::Index>(e) * T + t) = Eigen::Map<const nn::ColVec>(b.state_at(e, t), env_.state_dim);
    }
  }
  nn::Tape critic_tape;
  const nn::Mat v = critic_net_.forward(critic_, states, nullptr, nullptr, &critic_tape);
  out.values.assign(v.data(), v.data() + v.size());
  out.value = value_mse(out.values, d.returns, b.mask);

  // Actor over the whole batch.
  std::vector<AgentPool::Tape> tapes(static_cast<std::size_t>(T));
  out.logits.resize(A, cols * T);
  nn::Mat h = agents_.initial_hidden(cols), next;
  for (int t = 0; t < T; ++t) {
    out.logits.middleCols(t * cols, cols) = agents_.forward(actor_, batch_inputs(b, t), h, next, &tapes[static_cast<std::size_t>(t)]);
    h = next;
  }
  const auto total = static_cast<std::size_t>(cols * T);
  out.advantages.assign(total, 0.0);
  out.actions.assign(total, 0);
  out.mask.assign(total, 0);
  for (int t = 0; t < T; ++t) {
    for (int e = 0; e < B; ++e) {
      const std::size_t step = b.step_index(e, t);
      for (int i = 0; i < N; ++i) {
        const std::size_t c = (static_cast<std::size_t>(t) * B + e) * N + i;
        out.mask[c] = b.mask[step];
        out.actions[c] = b.action(e, t, i);
        out.advantages[c] = b.mask[step] ? d.returns[step] - out.values[step] : 0.0;
      }
    }
  }
  out.policy = clipped() ? ppo_policy_loss(out.logits, out.actions, d.old_log_probs, out.advantages, out.mask,
                                           config_.clip, config_.entropy_coefficient)
                         : actor_critic_policy_loss(out.logits, out.actions, out.advantages, out.mask,
                                                    config_.entropy_coefficient);
  if (!backprop) return out;

  critic_.zero_grad();
  critic_net_.backward(critic_, critic_tape, Eigen::Map<const nn::Mat>(out.value.dvalues.data(), 1, v.cols()), nullptr, nullptr);
  actor_.zero_grad();
  nn::Mat dh_carry;
  for (int t = T - 1; t >= 0; --t) {
    nn::Mat dh_in;
    agents_.backward(actor_, tapes[static_cast<std::size_t>(t)], out.policy.dlogits.middleCols(t * cols, cols),
                     dh_carry.size() ? &dh_carry : nullptr, &dh_in);
    dh_carry = std::move(dh_in);
  }
  return out;
}

TrainStats ActorCriticLearner::train(std::vector<Rollout> rollouts, std::int64_t, RngStream&) {
  const ActorCriticBatch data = prepare(rollouts);
  TrainStats stats;
  for (int epoch = 0; epoch < config_.epochs; ++epoch) {
    const ActorCriticLosses l = compute_losses(data, true);
    if (epoch == 0) {
      stats.values["policy_loss"] = l.policy.loss;
      stats.values["value_loss"] = l.value.loss;
      stats.values["entropy"] = l.policy.entropy;
    }
    stats.values["clip_fraction"] = l.policy.clip_fraction;
    actor_.clip_grad_norm(config_.grad_norm_clip);
    critic_.clip_grad_norm(config_.grad_norm_clip);
    if (actor_adam_) {
      actor_adam_->step(actor_);
      critic_adam_->step(critic_);
    } else {
      actor_rms_->step(actor_);
      critic_rms_->step(critic_);
    }
  }
  ++updates_;
  episodes_trained_ += rollouts.size();
  if (episodes_trained_ - last_target_episode_ >= static_cast<std::uint64_t>(config_.target_update)) {
    target_critic_.copy_values_from(critic_);
    last_target_episode_ = episodes_trained_;
  }
  stats.updated = true;
  return stats;
}

nn::Checkpoint ActorCriticLearner::checkpoint(const std::string& metadata) const {
  nn::Checkpoint c;
  c.specs.push_back({"agent", agents_.spec()});
  c.specs.push_back({"critic", critic_net_.spec()});
  c.metadata = metadata;
  c.parameters.assign(actor_.values().data(), actor_.values().data() + actor_.size());
  c.parameters.insert(c.parameters.end(), critic_.values().data(), critic_.values().data() + critic_.size());
  return c;
}

void ActorCriticLearner::load(const nn::Checkpoint& c) {
  if (c.parameters.size() != actor_.size() + critic_.size()) raise(ErrorCode::DimMismatch, "checkpoint does not fit this learner");
  if (c.specs.size() < 2 || !(c.specs[0].spec == agents_.spec()) || !(c.specs[1].spec == critic_net_.spec())) {
    raise(ErrorCode::DimMismatch, "network specs differ");
  }
  const auto na = static_cast<Eigen::Index>(actor_.size());
  actor_.values() = Eigen::Map<const nn::ColVec>(c.parameters.data(), na);
  critic_.values() = Eigen::Map<const nn::ColVec>(c.parameters.data() + na, static_cast<Eigen::Index>(critic_.size()));
  actor_.touch();
  critic_.touch();
  target_critic_.copy_values_from(critic_);
}

std::uint64_t ActorCriticLearner::state_digest() const {
  std::uint64_t h = fnv1a(actor_.values().data(), actor_.size() * sizeof(double));
  h = fnv1a(critic_.values().data(), critic_.size() * sizeof(double), h);
  h = fnv1a(target_critic_.values().data(), target_critic_.size() * sizeof(double), h);
  const double rs[3] = {reward_stats_.mean(), reward_stats_.var(), reward_stats_.count()};
  h = fnv1a(rs, sizeof rs, h);
  const std::uint64_t counters[4] = {static_cast<std::uint64_t>(updates_),
                                     static_cast<std::uint64_t>(actor_adam_ ? actor_adam_->steps() : 0),
                                     episodes_trained_, last_target_episode_};
  return fnv1a(counters, sizeof counters, h);
}

}  // namespace cmarl::algos

#pragma once

#include <optional>

#include "cmarl/algos/learner.hpp"
#include "cmarl/algos/losses.hpp"
#include "cmarl/algos/policy.hpp"
#include "cmarl/nn/optim.hpp"

namespace cmarl::algos {

/// Intermediate quantities of one actor-critic update, exposed for tests.
struct ActorCriticBatch {
  replay::EpisodeBatch batch;
  std::vector<double> rewards;          // [B][T] after optional standardisation
  std::vector<double> target_values;    // [B][T + 1] target critic
  std::vector<double> returns;          // [B][T] n-step targets
  std::vector<double> old_log_probs;    // [T][B][N] behaviour log-probs (column-major per step)
};

struct ActorCriticLosses {
  PolicyLoss policy;
  ValueLoss value;
  nn::Mat logits;              // actions x (T * B * N), column = t * B * N + b * N + i
  std::vector<double> values;  // [B][T] current critic
  std::vector<double> advantages;  // per actor column
  std::vector<int> actions;        // per actor column
  std::vector<std::uint8_t> mask;  // per actor column
};

/// MAA2C (epochs = 1, plain policy gradient) and MAPPO (clipped surrogate
/// over `epochs` passes). Recurrent shared actor over local inputs, a
/// feedforward critic V(state), n-step targets from a target critic copied
/// once `target_update` episodes have been trained on since the last copy.
class ActorCriticLearner final : public Learner {
 public:
  ActorCriticLearner(const LearnerConfig& config, const EnvSpec& env, std::uint64_t seed);

  bool clipped() const { return config_.algorithm == Algorithm::Mappo; }

  std::vector<int> act(const std::vector<Vec>& obs, ActorMemory& memory, ActMode mode, std::int64_t t_env,
                       RngStream& rng, std::vector<double>* log_probs) const override;
  TrainStats train(std::vector<Rollout> rollouts, std::int64_t t_env, RngStream& rng) override;

  /// Packs rollouts, standardises rewards and computes the n-step targets.
  ActorCriticBatch prepare(const std::vector<Rollout>& rollouts);
  /// Losses for the current parameters; accumulates gradients into the
  /// actor and critic stores when `backprop` is set.
  ActorCriticLosses compute_losses(const ActorCriticBatch& data, bool backprop);

  nn::Checkpoint checkpoint(const std::string& metadata) const override;
  void load(const nn::Checkpoint& checkpoint) override;
  std::uint64_t state_digest() const override;

  nn::ParameterStore& actor_params() { return actor_; }
  nn::ParameterStore& critic_params() { return critic_; }
  const nn::ParameterStore& target_critic_params() const { return target_critic_; }
  nn::ParameterStore& target_critic_params() { return target_critic_; }
  const AgentPool& agents() const { return agents_; }
  const nn::Network& critic() const { return critic_net_; }
  const RunningMeanStd& reward_stats() const { return reward_stats_; }

 private:
  nn::ParameterStore actor_, critic_, target_critic_;
  AgentPool agents_;
  nn::Network critic_net_;
  std::optional<nn::Adam> actor_adam_, critic_adam_;
  std::optional<nn::RmsProp> actor_rms_, critic_rms_;
  RunningMeanStd reward_stats_;
  std::uint64_t episodes_trained_ = 0;
  std::uint64_t last_target_episode_ = 0;
};

}  // namespace cmarl::algos

#pragma once

#include <optional>

#include "cmarl/algos/learner.hpp"
#include "cmarl/algos/losses.hpp"
#include "cmarl/algos/mixer.hpp"
#include "cmarl/algos/policy.hpp"
#include "cmarl/nn/optim.hpp"
#include "cmarl/replay/buffer.hpp"

namespace cmarl::algos {

/// Value decomposition learner: recurrent per-agent utilities combined by a
/// monotonic mixer, trained off-policy from an episode replay with a hard
/// target copy every `target_update` updates.
class QmixLearner final : public Learner {
 public:
  QmixLearner(const LearnerConfig& config, const EnvSpec& env, std::uint64_t seed);

  std::vector<int> act(const std::vector<Vec>& obs, ActorMemory& memory, ActMode mode, std::int64_t t_env,
                       RngStream& rng, std::vector<double>* log_probs) const override;
  TrainStats train(std::vector<Rollout> rollouts, std::int64_t t_env, RngStream& rng) override;

  /// One gradient step on `batch` with per-episode importance `weights`.
  /// Returns the loss and fills per-episode mean |TD error|.
  TrainStats update(const replay::EpisodeBatch& batch, std::span<const double> weights,
                    std::vector<double>* episode_td = nullptr);

  /// Loss and gradients for `batch` without applying them (gradients land in params()).
  double compute_loss(const replay::EpisodeBatch& batch, std::span<const double> weights,
                      std::vector<double>* episode_td);

  nn::Checkpoint checkpoint(const std::string& metadata) const override;
  void load(const nn::Checkpoint& checkpoint) override;
  std::uint64_t state_digest() const override;

  nn::ParameterStore& params() { return online_; }
  const nn::ParameterStore& params() const { return online_; }
  const nn::ParameterStore& target_params() const { return target_; }
  nn::ParameterStore& target_params() { return target_; }
  const AgentPool& agents() const { return agents_; }
  const QMixer& mixer() const { return mixer_; }
  const replay::ReplayBuffer& buffer() const { return buffer_; }
  const EpsilonSchedule& epsilon() const { return epsilon_; }
  const RunningMeanStd& reward_stats() const { return reward_stats_; }

  /// Total environment steps over which beta anneals (0 = stay at beta_start).
  void set_training_horizon(std::int64_t steps) { horizon_ = steps; }

 private:
  void register_parameters(nn::ParameterStore& store, AgentPool& agents, QMixer& mixer) const;

  nn::ParameterStore online_, target_;
  AgentPool agents_;
  QMixer mixer_;
  std::optional<nn::Adam> adam_;
  std::optional<nn::RmsProp> rmsprop_;
  replay::ReplayBuffer buffer_;
  EpsilonSchedule epsilon_;
  RunningMeanStd reward_stats_;
  std::int64_t horizon_ = 0;
  std::int64_t last_t_env_ = 0;
};

}  // namespace cmarl::algos

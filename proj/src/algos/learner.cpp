#include "cmarl/algos/learner.hpp"

#include "cmarl/algos/actor_critic.hpp"
#include "cmarl/algos/qmix.hpp"
#include "cmarl/core/errors.hpp"

namespace cmarl::algos {

Learner::Learner(const LearnerConfig& config, const EnvSpec& env) : config_(config), env_(env) {
  config_.validate();
  inputs_.obs_dim = env.obs_dim;
  inputs_.n_actions = env.n_actions;
  inputs_.n_agents = env.n_agents;
  inputs_.last_action = config.observation_last_action;
  inputs_.agent_id = config.observation_agent_id;
}

int Learner::rollouts_per_update() const {
  return config_.algorithm == Algorithm::Qmix ? 1 : config_.parallel_runners;
}

ActorMemory Learner::start_episode() const {
  ActorMemory m;
  m.hidden = nn::Mat::Zero(config_.hidden_dimension, env_.n_agents);
  m.last_actions.assign(static_cast<std::size_t>(env_.n_agents), 0);
  return m;
}

nn::Mat Learner::agent_outputs(const AgentPool& pool, const nn::ParameterStore& store, const std::vector<Vec>& obs,
                               ActorMemory& memory) const {
  if (static_cast<int>(obs.size()) != env_.n_agents) raise(ErrorCode::DimMismatch, "observation count");
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(env_.n_agents * env_.obs_dim));
  for (const Vec& o : obs) {
    if (static_cast<int>(o.size()) != env_.obs_dim) raise(ErrorCode::DimMismatch, "observation length");
    flat.insert(flat.end(), o.begin(), o.end());
  }
  nn::Mat input(inputs_.dim(), env_.n_agents);
  write_agent_inputs(inputs_, flat.data(), memory.first_step ? nullptr : memory.last_actions.data(), 0, input);
  nn::Mat next;
  nn::Mat out = pool.forward(store, input, memory.hidden, next, nullptr);
  memory.hidden = std::move(next);
  memory.first_step = false;
  return out;
}

nn::Mat Learner::batch_inputs(const replay::EpisodeBatch& batch, int t) const {
  nn::Mat input(inputs_.dim(), static_cast<Eigen::Index>(batch.batch) * env_.n_agents);
  std::vector<int> last(static_cast<std::size_t>(env_.n_agents));
  for (int b = 0; b < batch.batch; ++b) {
    if (t > 0) {
      for (int i = 0; i < env_.n_agents; ++i) last[static_cast<std::size_t>(i)] = batch.action(b, t - 1, i);
    }
    write_agent_inputs(inputs_, batch.obs_at(b, t, 0), t > 0 ? last.data() : nullptr, b, input);
  }
  return input;
}

std::unique_ptr<Learner> make_learner(const LearnerConfig& config, const EnvSpec& env, std::uint64_t seed) {
  switch (config.algorithm) {
    case Algorithm::Qmix: return std::make_unique<QmixLearner>(config, env, seed);
    case Algorithm::Maa2c:
    case Algorithm::Mappo: return std::make_unique<ActorCriticLearner>(config, env, seed);
  }
  raise(ErrorCode::BadConfig, "unknown algorithm");
}

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace cmarl::algos

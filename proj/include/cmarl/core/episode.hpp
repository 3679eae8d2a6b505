#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cmarl/core/env.hpp"

namespace cmarl {

/// Chooses one agent's action from its current observation.
using AgentPolicy = std::function<int(int agent, const Vec& obs, int n_actions, RngStream& rng)>;

AgentPolicy random_policy();
AgentPolicy constant_policy(int action);

struct EpisodeStep {
  std::vector<Vec> obs;  // observation the action was chosen from
  Vec state;
  std::vector<int> actions;
  double reward = 0.0;
  bool done = false;
  StepInfo info;

  bool operator==(const EpisodeStep&) const = default;
};

struct EpisodeRecord {
  std::vector<EpisodeStep> steps;
  std::vector<Vec> final_obs;
  Vec final_state;
  double episode_return = 0.0;
  int length = 0;

  bool operator==(const EpisodeRecord&) const = default;
};

/// Resets `env` and plays one episode to completion, render-free.
EpisodeRecord run_episode(Environment& env, const AgentPolicy& policy, RngStream& rng);

/// Bit-exact text serialization (hex floats) used for trajectory comparisons.
std::string trajectory_log(const EpisodeRecord& record);

}  // namespace cmarl

#pragma once

#include <cstdint>
#include <vector>

#include "cmarl/algos/learner.hpp"
#include "cmarl/core/env.hpp"

namespace cmarl::harness {

struct CollectedEpisode {
  algos::Rollout rollout;
  double episode_return = 0.0;
  bool terminated = false;  // ended in a terminal event rather than truncation
};

/// Resets `env` and plays one episode with `learner`. Exploration schedules
/// read t_env plus the step index.
CollectedEpisode play_episode(Environment& env, const algos::Learner& learner, algos::ActMode mode, std::int64_t t_env,
                              RngStream& rng);

/// A fixed set of environments, each with its own action RNG, collecting one
/// episode per environment per call. Results do not depend on the thread
/// count: environment k always uses stream k and lands in slot k.
class ParallelRunner {
 public:
  ParallelRunner(const EnvConfig& base, int workers, std::uint64_t seed, int threads);

  int workers() const { return static_cast<int>(envs_.size()); }
  int threads() const { return threads_; }
  const EnvSpec& spec() const { return envs_.front()->spec(); }

  std::vector<CollectedEpisode> collect(const algos::Learner& learner, algos::ActMode mode, std::int64_t t_env);

 private:
  std::vector<EnvHandle> envs_;
  std::vector<RngStream> rngs_;
  int threads_;
};

/// Hardware threads, at least 1.
int available_threads();

}  // namespace cmarl::harness

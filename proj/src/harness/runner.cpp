#include "cmarl/harness/runner.hpp"

#include <algorithm>
#include <exception>
#include <thread>

namespace cmarl::harness {

CollectedEpisode play_episode(Environment& env, const algos::Learner& learner, algos::ActMode mode, std::int64_t t_env,
                              RngStream& rng) {
  const EnvSpec& spec = env.spec();
  const ObsStateSnapshot first = env.reset();
  CollectedEpisode out;
  replay::Episode& e = out.rollout.episode;
  e.n_agents = spec.n_agents;
  e.obs_dim = spec.obs_dim;
  e.state_dim = spec.state_dim;
  auto record_obs = [&e](const std::vector<Vec>& obs, const Vec& state) {
    for (const Vec& o : obs) e.obs.insert(e.obs.end(), o.begin(), o.end());
    e.state.insert(e.state.end(), state.begin(), state.end());
  };
  record_obs(first.obs, first.state);

  algos::ActorMemory memory = learner.start_episode();
  std::vector<double> log_probs;
  for (int t = 0;; ++t) {
    const std::vector<int> actions = learner.act(env.get_obs(), memory, mode, t_env + t, rng, &log_probs);
    const StepOutcome r = env.step(actions);
    e.actions.insert(e.actions.end(), actions.begin(), actions.end());
    e.rewards.push_back(r.reward);
    e.terminated.push_back(r.info.terminated ? 1 : 0);
    out.rollout.behavior_log_probs.insert(out.rollout.behavior_log_probs.end(), log_probs.begin(), log_probs.end());
    out.episode_return += r.reward;
    record_obs(env.get_obs(), env.get_state());
    if (r.done) {
      out.terminated = r.info.terminated;
      e.length = t + 1;
      break;
    }
  }
  return out;
}

ParallelRunner::ParallelRunner(const EnvConfig& base, int workers, std::uint64_t seed, int threads)
    : threads_(std::clamp(threads, 1, std::max(workers, 1))) {
  for (int k = 0; k < workers; ++k) {
    EnvConfig c = base;
    c.seed = seed;
    c.stream_id = static_cast<std::uint64_t>(k);
    envs_.push_back(make_env(c));
    rngs_.emplace_back(seed, 1000 + static_cast<std::uint64_t>(k));
  }
}

std::vector<CollectedEpisode> ParallelRunner::collect(const algos::Learner& learner, algos::ActMode mode,
                                                      std::int64_t t_env) {
  std::vector<CollectedEpisode> out(envs_.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t k = first; k < envs_.size(); k += stride) out[k] = play_episode(*envs_[k], learner, mode, t_env, rngs_[k]);
  };
  if (threads_ == 1) {
    work(0, 1);
    return out;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads_));
  std::vector<std::thread> pool;
  for (int w = 0; w < threads_; ++w) {
    pool.emplace_back([&, w] {
      try {
        work(static_cast<std::size_t>(w), static_cast<std::size_t>(threads_));
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

int available_threads() { return std::max(1, static_cast<int>(std::thread::hardware_concurrency())); }

}  // namespace cmarl::harness

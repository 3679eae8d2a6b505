#include "cmarl/core/env.hpp"

#include <cmath>

#include "cmarl/core/errors.hpp"

namespace cmarl {

Environment::Environment(EnvConfig config, int default_time_limit)
    : config_(std::move(config)), rng_(config_.seed, config_.stream_id) {
  const int limit = config_.time_limit.value_or(default_time_limit);
  if (limit < 1) raise(ErrorCode::BadConfig, "time_limit must be >= 1");
  spec_.time_limit = limit;
}

void Environment::set_spec(int n_agents, int n_actions, int obs_dim, int state_dim) {
  spec_.n_agents = n_agents;
  spec_.n_actions = n_actions;
  spec_.obs_dim = obs_dim;
  spec_.state_dim = state_dim;
  obs_.assign(static_cast<std::size_t>(n_agents), Vec(static_cast<std::size_t>(obs_dim), 0.0));
  state_.assign(static_cast<std::size_t>(state_dim), 0.0);
}

void Environment::ensure_open() const {
  if (closed_) raise(ErrorCode::Closed, "environment handle is closed");
}

void Environment::refresh() {
  observe(obs_, state_, rng_);
}

ObsStateSnapshot Environment::reset() {
  ensure_open();
  steps_ = 0;
  done_ = false;
  started_ = true;
  on_reset(rng_);
  refresh();
  return {obs_, state_};
}

StepOutcome Environment::step(std::span<const int> actions) {
  ensure_open();
  if (!started_) raise(ErrorCode::EpisodeOver, "step() before reset()");
  if (done_) raise(ErrorCode::EpisodeOver, "step() after the episode ended; call reset()");
  if (static_cast<int>(actions.size()) != spec_.n_agents) {
    raise(ErrorCode::BadAction, "expected " + std::to_string(spec_.n_agents) +
                                    " actions, got " + std::to_string(actions.size()));
  }
  for (int a : actions) {
    if (a < 0 || a >= spec_.n_actions) {
      raise(ErrorCode::BadAction, "action index " + std::to_string(a) + " out of range [0, " +
                                      std::to_string(spec_.n_actions) + ")");
    }
  }

  Transition t = on_step(actions, rng_);
  ++steps_;
  refresh();

  StepOutcome out;
  out.reward = 0.0;
  for (double r : t.agent_rewards) out.reward += r;
  out.info.terminated = t.terminated;
  out.info.truncated = !t.terminated && steps_ >= spec_.time_limit;
  out.info.agent_rewards = std::move(t.agent_rewards);
  out.info.extras = std::move(t.extras);
  out.done = out.info.terminated || out.info.truncated;
  done_ = out.done;
  return out;
}

const std::vector<Vec>& Environment::get_obs() const {
  ensure_open();
  return obs_;
}

const Vec& Environment::get_state() const {
  ensure_open();
  return state_;
}

void Environment::seed(std::uint64_t seed) {
  config_.seed = seed;
  rng_.reseed(seed, config_.stream_id);
}

void Environment::close() { closed_ = true; }

}  // namespace cmarl

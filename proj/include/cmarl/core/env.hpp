#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cmarl/core/config.hpp"
#include "cmarl/core/errors.hpp"
#include "cmarl/core/rng.hpp"

namespace cmarl {

using Vec = std::vector<double>;

struct ObsStateSnapshot {
  std::vector<Vec> obs;  // one flat vector per agent
  Vec state;

  bool operator==(const ObsStateSnapshot&) const = default;
};

struct StepInfo {
  bool truncated = false;   // cut by time_limit without a terminal event
  bool terminated = false;  // terminal event of the task
  Vec agent_rewards;
  std::map<std::string, double> extras;  // environment-specific counters

  bool operator==(const StepInfo&) const = default;
};

struct StepOutcome {
  double reward = 0.0;  // team reward, sum of info.agent_rewards
  bool done = false;
  StepInfo info;

  bool operator==(const StepOutcome&) const = default;
};

struct EnvSpec {
  int n_agents = 0;
  int n_actions = 0;  // per agent; all agents share one action set
  int obs_dim = 0;
  int state_dim = 0;
  int time_limit = 0;

  bool operator==(const EnvSpec&) const = default;
};

/// Dec-POMDP environment behind the reset/step/get_obs/get_state/close API.
///
/// The base class owns the bookkeeping shared by every task: the episode
/// step counter, truncation at time_limit, action validation, the seeded
/// RNG stream, and the cached observation/state of the current tick.
/// Subclasses implement the dynamics only. An instance is single-threaded.
class Environment {
 public:
  virtual ~Environment() = default;

  Environment(const Environment&) = delete;
  Environment& operator=(const Environment&) = delete;

  const EnvSpec& spec() const { return spec_; }
  int n_agents() const { return spec_.n_agents; }
  int get_total_actions() const { return spec_.n_actions; }
  int obs_dim() const { return spec_.obs_dim; }
  int state_dim() const { return spec_.state_dim; }
  int time_limit() const { return spec_.time_limit; }
  const EnvConfig& config() const { return config_; }

  ObsStateSnapshot reset();
  StepOutcome step(std::span<const int> actions);

  const std::vector<Vec>& get_obs() const;
  const Vec& get_state() const;

  /// Restarts the RNG stream; the next reset() replays the first episode.
  void seed(std::uint64_t seed);
  void close();

  bool closed() const { return closed_; }
  bool episode_done() const { return done_; }
  int step_count() const { return steps_; }

  /// Plain-text dump of the current state.
  virtual std::string render() const = 0;

 protected:
  Environment(EnvConfig config, int default_time_limit);

  struct Transition {
    Vec agent_rewards;
    bool terminated = false;
    std::map<std::string, double> extras;
  };

  /// Must be called once from the subclass constructor.
  void set_spec(int n_agents, int n_actions, int obs_dim, int state_dim);

  virtual void on_reset(RngStream& rng) = 0;
  virtual Transition on_step(std::span<const int> actions, RngStream& rng) = 0;
  /// Writes the current observations and global state into the caches.
  virtual void observe(std::vector<Vec>& obs, Vec& state, RngStream& rng) = 0;

  RngStream& rng() { return rng_; }
  /// Recomputes the cached observation/state (after a test overrides state).
  void refresh();

 private:
  void ensure_open() const;

  EnvConfig config_;
  EnvSpec spec_;
  RngStream rng_;
  std::vector<Vec> obs_;
  Vec state_;
  int steps_ = 0;
  bool started_ = false;
  bool done_ = false;
  bool closed_ = false;
};

using EnvHandle = std::unique_ptr<Environment>;

/// Builds the environment named by (family, key); throws UnknownKey or
/// BadExtra for invalid configurations.
EnvHandle make_env(const EnvConfig& config);

/// Default time_limit of the family addressed by `config`.
int default_time_limit(const EnvConfig& config);

/// Every task key the registry accepts, as "family/key" pairs.
std::vector<std::pair<EnvFamily, std::string>> known_tasks();

}  // namespace cmarl

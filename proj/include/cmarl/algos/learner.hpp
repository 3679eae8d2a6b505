#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cmarl/algos/agent_pool.hpp"
#include "cmarl/algos/config.hpp"
#include "cmarl/core/env.hpp"
#include "cmarl/nn/checkpoint.hpp"
#include "cmarl/replay/episode_batch.hpp"

namespace cmarl::algos {

/// One collected episode plus the behaviour policy's log-probabilities of
/// the actions taken ([T][N]; empty for value-based learners).
struct Rollout {
  replay::Episode episode;
  std::vector<double> behavior_log_probs;
};

/// Per-environment acting state: recurrent hidden (hidden x N) and the
/// previous joint action.
struct ActorMemory {
  nn::Mat hidden;
  std::vector<int> last_actions;
  bool first_step = true;
};

enum class ActMode { Explore, Evaluate };

struct TrainStats {
  bool updated = false;
  std::map<std::string, double> values;
};

/// Common surface of the three learners. `act` only reads parameters and may
/// run concurrently from several runner threads; `train` is exclusive.
class Learner {
 public:
  Learner(const LearnerConfig& config, const EnvSpec& env);
  virtual ~Learner() = default;

  const LearnerConfig& config() const { return config_; }
  const EnvSpec& env_spec() const { return env_; }
  const AgentInputSpec& input_spec() const { return inputs_; }

  /// Episodes to collect before each `train` call.
  int rollouts_per_update() const;

  ActorMemory start_episode() const;
  virtual std::vector<int> act(const std::vector<Vec>& obs, ActorMemory& memory, ActMode mode, std::int64_t t_env,
                               RngStream& rng, std::vector<double>* log_probs) const = 0;
  virtual TrainStats train(std::vector<Rollout> rollouts, std::int64_t t_env, RngStream& rng) = 0;

  virtual nn::Checkpoint checkpoint(const std::string& metadata) const = 0;
  virtual void load(const nn::Checkpoint& checkpoint) = 0;
  /// Digest of everything training mutates (parameters, optimizer, replay).
  virtual std::uint64_t state_digest() const = 0;
  long update_count() const { return updates_; }

 protected:
  /// Agent-network outputs (outputs x N) for one environment tick; advances memory.hidden.
  nn::Mat agent_outputs(const AgentPool& pool, const nn::ParameterStore& store, const std::vector<Vec>& obs,
                        ActorMemory& memory) const;
  /// Inputs for step t of every episode in `batch` (columns b * N + i).
  nn::Mat batch_inputs(const replay::EpisodeBatch& batch, int t) const;

  LearnerConfig config_;
  EnvSpec env_;
  AgentInputSpec inputs_;
  long updates_ = 0;
};

std::unique_ptr<Learner> make_learner(const LearnerConfig& config, const EnvSpec& env, std::uint64_t seed);

/// FNV-1a over raw bytes, for state digests.
std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t seed = 1469598103934665603ull);

}  // namespace cmarl::algos

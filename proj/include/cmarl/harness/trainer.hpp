#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cmarl/algos/learner.hpp"
#include "cmarl/core/episode.hpp"
#include "cmarl/harness/metrics.hpp"
#include "cmarl/harness/run_config.hpp"

namespace cmarl::harness {

struct EvalResult {
  MetricsRow row;
  std::vector<double> returns;
};

/// Plays `n_episodes` evaluation-mode episodes in a fresh environment seeded
/// with `seed`. Reads the learner only; uses its own RNG stream.
EvalResult evaluate(const algos::Learner& learner, const EnvConfig& env, int n_episodes, std::uint64_t seed,
                    std::int64_t step = 0);
/// Same protocol for a fixed per-agent policy.
EvalResult evaluate(const AgentPolicy& policy, const EnvConfig& env, int n_episodes, std::uint64_t seed,
                    std::int64_t step = 0);

struct TrainHooks {
  /// Called after every evaluation row; returning true ends the run early.
  std::function<bool(const MetricsRow&)> stop_when;
  /// Observes each evaluation (e.g. progress printing).
  std::function<void(const MetricsRow&)> on_eval;
};

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<MetricsRow> rows;
  std::int64_t steps = 0;
  long updates = 0;
  double wall_seconds = 0.0;
  bool stopped_early = false;
  std::uint64_t state_digest = 0;
  std::string directory;  // empty when nothing was written
};

/// One seed of a run. Writes `<output_dir>/seed_<seed>/metrics.csv`,
/// a checkpoint per evaluation and run.json unless output_dir is empty.
RunResult train_seed(const RunConfig& run, std::uint64_t seed, const TrainHooks& hooks = {});
/// Every seed in run.seeds, sequentially.
std::vector<RunResult> train(const RunConfig& run, const TrainHooks& hooks = {});

/// Checkpoint metadata: the run settings, seed and step as JSON.
std::string checkpoint_metadata(const RunConfig& run, std::uint64_t seed, std::int64_t step);

struct LoadedPolicy {
  RunConfig run;
  std::uint64_t seed = 0;
  std::int64_t step = 0;
  std::unique_ptr<algos::Learner> learner;
};

/// Rebuilds the learner and run settings stored in a checkpoint file.
LoadedPolicy load_policy(const std::string& checkpoint_path);

}  // namespace cmarl::harness

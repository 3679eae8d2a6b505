#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cmarl/algos/config.hpp"
#include "cmarl/core/config.hpp"

namespace cmarl::harness {

/// Everything one training run needs. Settings are addressed as
/// "section.field" with sections `run`, `env` and `learner`; unknown `env`
/// fields become environment extras.
struct RunConfig {
  algos::LearnerConfig learner;
  EnvConfig env;
  std::int64_t total_steps = 2'000'000;
  std::int64_t eval_interval = 50'000;
  int n_test_episodes = 100;
  std::vector<std::uint64_t> seeds = {1};
  std::string output_dir = "runs/default";
  bool save_checkpoints = true;

  void set(std::string_view dotted, std::string_view value);
  /// Every setting as "section.field" -> text; set() accepts each back.
  std::map<std::string, std::string> fields() const;
  /// Raises BadConfig on inconsistent values (and builds the environment once
  /// to surface UnknownKey / BadExtra before training starts).
  void validate() const;
};

/// Learner table defaults for `algo` plus per-task exceptions (Spread with
/// four or five agents uses separate agent parameters).
RunConfig make_run_config(algos::Algorithm algo, EnvFamily family, std::string key);

/// Applies an INI file: `[section]` headers and `field = value` lines.
void apply_config_file(RunConfig& run, const std::string& path);

/// configs/<algorithm>.cfg in the source tree.
std::string default_config_path(algos::Algorithm algo);

/// Evaluation environments use the training seed xor a fixed offset.
inline constexpr std::uint64_t kEvalSeedOffset = 0x9e3779b97f4a7c15ull;
inline std::uint64_t eval_seed(std::uint64_t train_seed) { return train_seed ^ kEvalSeedOffset; }

}  // namespace cmarl::harness

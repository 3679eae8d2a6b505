#pragma once

#include <cstdint>

#include "cmarl/core/config.hpp"

namespace cmarl::harness {

struct Throughput {
  std::int64_t steps = 0;
  double seconds = 0.0;
  double steps_per_second() const { return seconds > 0 ? static_cast<double>(steps) / seconds : 0.0; }
};

/// Uniform-random joint actions on one environment for `steps` steps,
/// resetting on episode end. Single thread.
Throughput random_stepping(const EnvConfig& env, std::int64_t steps, std::uint64_t seed = 1);

/// `workers` threads, each stepping its own environment instance for
/// `steps_per_worker` random steps. Wall time covers all of them.
Throughput parallel_random_stepping(const EnvConfig& env, int workers, std::int64_t steps_per_worker,
                                    std::uint64_t seed = 1);

}  // namespace cmarl::harness

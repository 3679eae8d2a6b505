#include "cmarl/harness/bench.hpp"

#include <chrono>
#include <thread>
#include <vector>

#include "cmarl/core/env.hpp"

namespace cmarl::harness {

namespace {

void step_randomly(Environment& env, std::int64_t steps, RngStream& rng) {
  std::vector<int> actions(static_cast<std::size_t>(env.n_agents()));
  const auto n = static_cast<std::uint32_t>(env.get_total_actions());
  env.reset();
  for (std::int64_t k = 0; k < steps; ++k) {
    for (int& a : actions) a = static_cast<int>(rng.below(n));
    if (env.step(actions).done) env.reset();
  }
}

}  // namespace

Throughput random_stepping(const EnvConfig& config, std::int64_t steps, std::uint64_t seed) {
  EnvConfig c = config;
  c.seed = seed;
  const EnvHandle env = make_env(c);
  RngStream rng(seed, 11);
  const auto start = std::chrono::steady_clock::now();
  step_randomly(*env, steps, rng);
  return {steps, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
}

Throughput parallel_random_stepping(const EnvConfig& config, int workers, std::int64_t steps_per_worker,
                                    std::uint64_t seed) {
  std::vector<EnvHandle> envs;
  std::vector<RngStream> rngs;
  for (int w = 0; w < workers; ++w) {
    EnvConfig c = config;
    c.seed = seed;
    c.stream_id = static_cast<std::uint64_t>(w);
    envs.push_back(make_env(c));
    rngs.emplace_back(seed, 100 + static_cast<std::uint64_t>(w));
  }
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] { step_randomly(*envs[static_cast<std::size_t>(w)], steps_per_worker, rngs[static_cast<std::size_t>(w)]); });
  }
  for (auto& t : pool) t.join();
  return {steps_per_worker * workers, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
}

}  // namespace cmarl::harness

#pragma once

#include <cstdint>
#include <optional>
#include <shared_mutex>
#include <span>
#include <vector>

#include "cmarl/replay/episode_batch.hpp"
#include "cmarl/replay/sum_tree.hpp"

namespace cmarl::replay {

struct ReplayConfig {
  std::size_t capacity = 5000;
  bool prioritized = false;
  double alpha = 0.6;
  double beta_start = 0.4;
  double beta_end = 1.0;
  double eps = 1e-6;
};

struct SampledBatch {
  EpisodeBatch batch;
  std::vector<std::uint64_t> ids;
  std::vector<double> weights;  // importance weights; all 1 for uniform sampling
};

/// FIFO episode store. Ids are insertion counters, so an id stays valid
/// until its episode is evicted. Priorities are per episode; the tree holds
/// priority^alpha. A single writer and many readers may share the buffer.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(ReplayConfig config = {});

  const ReplayConfig& config() const { return config_; }
  std::size_t size() const;
  bool ready(std::size_t batch) const { return size() >= batch; }
  std::uint64_t inserted() const;

  /// Stores the episode at the current maximum priority; returns its id.
  std::uint64_t insert(Episode episode);
  Episode episode(std::uint64_t id) const;
  double priority(std::uint64_t id) const;

  SampledBatch sample_uniform(std::size_t batch, RngStream& rng) const;
  SampledBatch sample_prioritized(std::size_t batch, double beta, RngStream& rng) const;
  /// Prioritized when configured, uniform otherwise.
  SampledBatch sample(std::size_t batch, double beta, RngStream& rng) const;

  /// priority = |td_error| + eps.
  void update_priorities(std::span<const std::uint64_t> ids, std::span<const double> td_errors);

  /// Linear beta schedule; `progress` is the fraction of training done.
  double beta_at(double progress) const;

  const SumTree& tree() const { return tree_; }

 private:
  std::size_t slot_of(std::uint64_t id) const;
  SampledBatch gather(std::vector<std::uint64_t> ids) const;

  ReplayConfig config_;
  mutable std::shared_mutex mutex_;
  std::vector<std::optional<Episode>> slots_;
  std::vector<double> priorities_;
  SumTree tree_;
  std::uint64_t inserted_ = 0;
  double max_priority_ = 1.0;
};

}  // namespace cmarl::replay

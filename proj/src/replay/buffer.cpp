#include "cmarl/replay/buffer.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>

#include "cmarl/core/errors.hpp"

namespace cmarl::replay {

ReplayBuffer::ReplayBuffer(ReplayConfig config)
    : config_(config), slots_(config.capacity), priorities_(config.capacity, 0.0), tree_(config.capacity) {
  if (config.capacity == 0) raise(ErrorCode::BadConfig, "replay capacity must be positive");
  if (config.alpha < 0.0 || config.eps <= 0.0) raise(ErrorCode::BadConfig, "bad prioritization parameters");
}

std::size_t ReplayBuffer::size() const {
  std::shared_lock lock(mutex_);
  return static_cast<std::size_t>(std::min<std::uint64_t>(inserted_, config_.capacity));
}

std::uint64_t ReplayBuffer::inserted() const {
  std::shared_lock lock(mutex_);
  return inserted_;
}

std::size_t ReplayBuffer::slot_of(std::uint64_t id) const {
  const std::uint64_t stored = std::min<std::uint64_t>(inserted_, config_.capacity);
  if (id >= inserted_ || id < inserted_ - stored) raise(ErrorCode::BadId, "episode id " + std::to_string(id) + " is not stored");
  return static_cast<std::size_t>(id % config_.capacity);
}

std::uint64_t ReplayBuffer::insert(Episode episode) {
  episode.validate();
  std::unique_lock lock(mutex_);
  const std::uint64_t id = inserted_;
  const auto slot = static_cast<std::size_t>(id % config_.capacity);
  slots_[slot] = std::move(episode);
  priorities_[slot] = max_priority_;
  tree_.set(slot, std::pow(max_priority_, config_.alpha));
  ++inserted_;
  return id;
}

Episode ReplayBuffer::episode(std::uint64_t id) const {
  std::shared_lock lock(mutex_);
  return *slots_[slot_of(id)];
}

double ReplayBuffer::priority(std::uint64_t id) const {
  std::shared_lock lock(mutex_);
  return priorities_[slot_of(id)];
}

SampledBatch ReplayBuffer::gather(std::vector<std::uint64_t> ids) const {
  std::vector<const Episode*> eps;
  eps.reserve(ids.size());
  for (std::uint64_t id : ids) eps.push_back(&*slots_[slot_of(id)]);
  SampledBatch out;
  out.batch = EpisodeBatch::pack(eps);
  out.ids = std::move(ids);
  return out;
}

SampledBatch ReplayBuffer::sample_uniform(std::size_t batch, RngStream& rng) const {
  std::shared_lock lock(mutex_);
  const auto stored = static_cast<std::size_t>(std::min<std::uint64_t>(inserted_, config_.capacity));
  if (batch == 0 || stored < batch) raise(ErrorCode::Underfilled, "replay holds fewer episodes than the batch size");
  const std::uint64_t oldest = inserted_ - stored;
  // Partial Fisher-Yates over the stored ids.
  std::vector<std::uint64_t> pool(stored);
  std::iota(pool.begin(), pool.end(), oldest);
  for (std::size_t i = 0; i < batch; ++i) {
    const std::size_t j = i + rng.below(static_cast<std::uint32_t>(stored - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(batch);
  SampledBatch out = gather(std::move(pool));
  out.weights.assign(batch, 1.0);
  return out;
}

SampledBatch ReplayBuffer::sample_prioritized(std::size_t batch, double beta, RngStream& rng) const {
  std::shared_lock lock(mutex_);
  const auto stored = static_cast<std::size_t>(std::min<std::uint64_t>(inserted_, config_.capacity));
  if (batch == 0 || stored < batch) raise(ErrorCode::Underfilled, "replay holds fewer episodes than the batch size");
  const std::uint64_t oldest = inserted_ - stored;
  const double total = tree_.total();
  std::vector<std::uint64_t> ids;
  std::vector<double> weights;
  for (std::size_t i = 0; i < batch; ++i) {
    const std::size_t slot = tree_.find(rng.uniform() * total);
    // Map the slot back to the id currently living there.
    std::uint64_t id = oldest + ((slot + config_.capacity - oldest % config_.capacity) % config_.capacity);
    ids.push_back(id);
    const double p = tree_.get(slot) / total;
    weights.push_back(std::pow(static_cast<double>(stored) * p, -beta));
  }
  const double max_w = *std::max_element(weights.begin(), weights.end());
  for (double& w : weights) w /= max_w;
  SampledBatch out = gather(std::move(ids));
  out.weights = std::move(weights);
  return out;
}

SampledBatch ReplayBuffer::sample(std::size_t batch, double beta, RngStream& rng) const {
  return config_.prioritized ? sample_prioritized(batch, beta, rng) : sample_uniform(batch, rng);
}

void ReplayBuffer::update_priorities(std::span<const std::uint64_t> ids, std::span<const double> td_errors) {
  if (ids.size() != td_errors.size()) raise(ErrorCode::DimMismatch, "ids and td errors differ in length");
  std::unique_lock lock(mutex_);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const std::size_t slot = slot_of(ids[i]);
    const double p = std::abs(td_errors[i]) + config_.eps;
    priorities_[slot] = p;
    max_priority_ = std::max(max_priority_, p);
    tree_.set(slot, std::pow(p, config_.alpha));
  }
}

double ReplayBuffer::beta_at(double progress) const {
  const double f = std::clamp(progress, 0.0, 1.0);
  return config_.beta_start + f * (config_.beta_end - config_.beta_start);
}

}  // namespace cmarl::replay

#include "cmarl/replay/episode_batch.hpp"

#include <algorithm>

#include "cmarl/core/errors.hpp"

namespace cmarl::replay {

namespace {

void append(std::vector<double>& out, const std::vector<Vec>& per_agent) {
  for (const Vec& v : per_agent) out.insert(out.end(), v.begin(), v.end());
}

}  // namespace

Episode Episode::from_record(const EpisodeRecord& record) {
  Episode e;
  e.length = record.length;
  e.n_agents = static_cast<int>(record.final_obs.size());
  e.obs_dim = e.n_agents ? static_cast<int>(record.final_obs[0].size()) : 0;
  e.state_dim = static_cast<int>(record.final_state.size());
  for (const EpisodeStep& s : record.steps) {
    append(e.obs, s.obs);
    e.state.insert(e.state.end(), s.state.begin(), s.state.end());
    e.actions.insert(e.actions.end(), s.actions.begin(), s.actions.end());
    e.rewards.push_back(s.reward);
    e.terminated.push_back(s.info.terminated ? 1 : 0);
  }
  append(e.obs, record.final_obs);
  e.state.insert(e.state.end(), record.final_state.begin(), record.final_state.end());
  e.validate();
  return e;
}

void Episode::validate() const {
  const auto T = static_cast<std::size_t>(length);
  const bool ok = length >= 1 && n_agents >= 1 && obs.size() == (T + 1) * n_agents * obs_dim &&
                  state.size() == (T + 1) * state_dim && actions.size() == T * n_agents &&
                  rewards.size() == T && terminated.size() == T;
  if (!ok) raise(ErrorCode::DimMismatch, "malformed episode");
  for (std::size_t t = 0; t + 1 < T; ++t) {
    if (terminated[t]) raise(ErrorCode::DimMismatch, "terminal flag before the last step");
  }
}

EpisodeBatch EpisodeBatch::pack(const std::vector<const Episode*>& episodes) {
  if (episodes.empty()) raise(ErrorCode::Underfilled, "empty batch");
  EpisodeBatch b;
  const Episode& first = *episodes.front();
  b.batch = static_cast<int>(episodes.size());
  b.n_agents = first.n_agents;
  b.obs_dim = first.obs_dim;
  b.state_dim = first.state_dim;
  for (const Episode* e : episodes) b.max_len = std::max(b.max_len, e->length);
  const auto B = static_cast<std::size_t>(b.batch);
  const auto T = static_cast<std::size_t>(b.max_len);
  const std::size_t obs_step = static_cast<std::size_t>(b.n_agents) * b.obs_dim;
  b.obs.assign(B * (T + 1) * obs_step, 0.0);
  b.state.assign(B * (T + 1) * b.state_dim, 0.0);
  b.actions.assign(B * T * b.n_agents, 0);
  b.rewards.assign(B * T, 0.0);
  b.terminated.assign(B * T, 0);
  b.mask.assign(B * T, 0);
  for (std::size_t i = 0; i < B; ++i) {
    const Episode& e = *episodes[i];
    if (e.n_agents != b.n_agents || e.obs_dim != b.obs_dim || e.state_dim != b.state_dim) {
      raise(ErrorCode::DimMismatch, "episodes in a batch must share dimensions");
    }
    const auto L = static_cast<std::size_t>(e.length);
    std::copy(e.obs.begin(), e.obs.end(), b.obs.begin() + static_cast<std::ptrdiff_t>(i * (T + 1) * obs_step));
    std::copy(e.state.begin(), e.state.end(), b.state.begin() + static_cast<std::ptrdiff_t>(i * (T + 1) * b.state_dim));
    std::copy(e.actions.begin(), e.actions.end(), b.actions.begin() + static_cast<std::ptrdiff_t>(i * T * b.n_agents));
    std::copy(e.rewards.begin(), e.rewards.end(), b.rewards.begin() + static_cast<std::ptrdiff_t>(i * T));
    std::copy(e.terminated.begin(), e.terminated.end(), b.terminated.begin() + static_cast<std::ptrdiff_t>(i * T));
    std::fill_n(b.mask.begin() + static_cast<std::ptrdiff_t>(i * T), L, std::uint8_t{1});
    b.lengths.push_back(e.length);
  }
  return b;
}

}  // namespace cmarl::replay

#pragma once

#include <cstdint>
#include <vector>

#include "cmarl/core/episode.hpp"

namespace cmarl::replay {

/// One stored episode of `length` steps. Observations and states hold
/// length + 1 entries so the successor of the last step is available.
struct Episode {
  int n_agents = 0;
  int obs_dim = 0;
  int state_dim = 0;
  int length = 0;
  std::vector<double> obs;       // [length + 1][n_agents][obs_dim]
  std::vector<double> state;     // [length + 1][state_dim]
  std::vector<int> actions;      // [length][n_agents]
  std::vector<double> rewards;   // [length]
  std::vector<std::uint8_t> terminated;  // [length]; 1 only on a terminal (not truncated) last step

  static Episode from_record(const EpisodeRecord& record);
  void validate() const;
  bool operator==(const Episode&) const = default;
};

/// B episodes padded to the longest one (T steps). Padded steps have mask 0
/// and zeros everywhere else.
struct EpisodeBatch {
  int batch = 0;
  int max_len = 0;
  int n_agents = 0;
  int obs_dim = 0;
  int state_dim = 0;
  std::vector<double> obs;       // [B][T + 1][N][obs_dim]
  std::vector<double> state;     // [B][T + 1][state_dim]
  std::vector<int> actions;      // [B][T][N]
  std::vector<double> rewards;   // [B][T]
  std::vector<std::uint8_t> terminated;  // [B][T]
  std::vector<std::uint8_t> mask;        // [B][T]
  std::vector<int> lengths;      // [B]

  static EpisodeBatch pack(const std::vector<const Episode*>& episodes);

  const double* obs_at(int b, int t, int agent) const {
    return obs.data() + ((static_cast<std::size_t>(b) * (max_len + 1) + t) * n_agents + agent) * obs_dim;
  }
  const double* state_at(int b, int t) const {
    return state.data() + (static_cast<std::size_t>(b) * (max_len + 1) + t) * state_dim;
  }
  int action(int b, int t, int agent) const {
    return actions[(static_cast<std::size_t>(b) * max_len + t) * n_agents + agent];
  }
  std::size_t step_index(int b, int t) const { return static_cast<std::size_t>(b) * max_len + t; }
};

}  // namespace cmarl::replay

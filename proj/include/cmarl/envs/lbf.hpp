#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cmarl/core/env.hpp"
#include "cmarl/envs/grid.hpp"

namespace cmarl::env {

/// Level-Based Foraging task parsed from keys such as
/// "Foraging-2s-12x12-2p-2f-coop-v2". sight == 0 means full observability.
struct LbfTask {
  int rows = 8;
  int cols = 8;
  int n_players = 2;
  int n_foods = 1;
  int sight = 0;
  bool coop = false;

  bool operator==(const LbfTask&) const = default;
};

LbfTask parse_lbf_key(std::string_view key);
std::string format_lbf_key(const LbfTask& task);

enum LbfAction : int { kLbfNoop = 0, kLbfNorth, kLbfSouth, kLbfWest, kLbfEast, kLbfPickup };
inline constexpr int kLbfActions = 6;

struct LbfPlayer {
  Cell pos;
  int level = 1;
  bool operator==(const LbfPlayer&) const = default;
};

struct LbfFood {
  Cell pos;
  int level = 1;
  bool collected = false;
  bool operator==(const LbfFood&) const = default;
};

struct LbfState {
  std::vector<LbfPlayer> players;
  std::vector<LbfFood> foods;  // spawn order
  double total_food_level = 0.0;

  bool operator==(const LbfState&) const = default;
};

/// Triplets (row, col, level): foods in spawn order, then the observing
/// player, then the other players by index. Collected or out-of-sight
/// entities read (-1, -1, 0).
void lbf_observe(const LbfTask& task, const LbfState& state, int agent, std::span<double> out);
Vec lbf_observe(const LbfTask& task, const LbfState& state, int agent);

/// Lossless global encoding: food triplets then player triplets in index order.
Vec lbf_global_state(const LbfTask& task, const LbfState& state);

/// Per-participant share of one collection event; participants are player
/// indices adjacent to the food that issued Pick-up.
Vec lbf_reward(const LbfState& state, const LbfFood& food, std::span<const int> participants);

/// Applies one joint action in place and returns the per-agent rewards.
Vec lbf_step(const LbfTask& task, LbfState& state, std::span<const int> actions);

/// Random placement; throws UnsatisfiableSpawn when the grid is too small.
LbfState lbf_spawn(const LbfTask& task, int max_player_level, RngStream& rng);

bool lbf_all_collected(const LbfState& state);

class LbfEnv final : public Environment {
 public:
  explicit LbfEnv(const EnvConfig& config);

  const LbfTask& task() const { return task_; }
  const LbfState& state() const { return state_; }
  /// Test hook: replaces the current state (episode counters untouched).
  void set_state(const LbfState& state) {
    state_ = state;
    refresh();
  }

  std::string render() const override;

 protected:
  void on_reset(RngStream& rng) override;
  Transition on_step(std::span<const int> actions, RngStream& rng) override;
  void observe(std::vector<Vec>& obs, Vec& state, RngStream& rng) override;

 private:
  LbfTask task_;
  int max_player_level_ = 2;
  LbfState state_;
};

}  // namespace cmarl::env

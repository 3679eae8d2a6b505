#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cmarl/core/env.hpp"
#include "cmarl/envs/grid.hpp"

namespace cmarl::env {

enum class WarehouseCell : char { Highway = '.', Rack = 'x', Goal = 'g' };

/// Warehouse floor plan. ASCII legend: 'x' rack cell (a shelf starts here,
/// shelves may be set down), '.' highway (path-restricted, no set-down),
/// 'g' workstation. Rows run top to bottom.
struct WarehouseLayout {
  int rows = 0;
  int cols = 0;
  std::vector<WarehouseCell> cells;  // row-major

  WarehouseCell at(Cell c) const { return cells[static_cast<std::size_t>(c.row * cols + c.col)]; }
  bool path_restricted(Cell c) const { return at(c) != WarehouseCell::Rack; }

  static WarehouseLayout parse(std::string_view ascii);
  std::string to_ascii() const;
};

/// Built-in layouts: "tiny" (10 wide x 11 tall) and "small" (10 x 20).
WarehouseLayout rware_builtin_layout(std::string_view size);

struct RwareTask {
  std::string size;  // "tiny" | "small"
  int n_agents = 2;
  int request_queue_size = 1;
};

/// "rware-{tiny|small}-{N}ag[-easy|-hard]-v1"; hard ⇒ R = ceil(N/2),
/// default ⇒ R = N, easy ⇒ R = 2N.
RwareTask parse_rware_key(std::string_view key);

enum RwareAction : int { kRwareTurnLeft = 0, kRwareTurnRight, kRwareForward, kRwareToggleLoad };
inline constexpr int kRwareActions = 4;
enum RwareDir : int { kDirUp = 0, kDirDown, kDirLeft, kDirRight };
inline constexpr int kRwareObsDim = 71;

struct Robot {
  Cell pos;
  int dir = kDirUp;
  int carrying = -1;  // shelf id or -1
  bool operator==(const Robot&) const = default;
};

struct RwareState {
  std::vector<Robot> robots;
  std::vector<Cell> shelves;  // carried shelves track their robot
  std::vector<int> requests;  // requested shelf ids, |requests| == R

  bool operator==(const RwareState&) const = default;
};

/// Row-major occupancy lookups derived from a state.
struct RwareGrids {
  std::vector<int> robot;  // robot id or -1
  std::vector<int> shelf;  // shelf id or -1
  std::vector<bool> requested;  // per shelf id
};
RwareGrids rware_grids(const WarehouseLayout& layout, const RwareState& state);

void rware_observe(const WarehouseLayout& layout, const RwareState& state, const RwareGrids& grids,
                   int agent, std::span<double> out);
Vec rware_observe(const WarehouseLayout& layout, const RwareState& state, int agent);

/// Replaces `delivered` in the queue with a shelf drawn uniformly from those
/// neither requested nor just delivered.
std::vector<int> rware_request_refresh(const std::vector<int>& queue, int delivered, int n_shelves,
                                       RngStream& rng);

Vec rware_step(const WarehouseLayout& layout, RwareState& state, std::span<const int> actions,
               RngStream& rng);

RwareState rware_spawn(const WarehouseLayout& layout, int n_agents, int request_queue_size,
                       RngStream& rng);

class RwareEnv final : public Environment {
 public:
  explicit RwareEnv(const EnvConfig& config);

  const WarehouseLayout& layout() const { return layout_; }
  const RwareState& state() const { return state_; }
  void set_state(const RwareState& state) {
    state_ = state;
    refresh();
  }

  std::string render() const override;

 protected:
  void on_reset(RngStream& rng) override;
  Transition on_step(std::span<const int> actions, RngStream& rng) override;
  void observe(std::vector<Vec>& obs, Vec& state, RngStream& rng) override;

 private:
  RwareTask task_;
  WarehouseLayout layout_;
  RwareState state_;
};

}  // namespace cmarl::env

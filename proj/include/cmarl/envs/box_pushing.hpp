#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "cmarl/core/env.hpp"
#include "cmarl/envs/grid.hpp"

namespace cmarl::env {

enum BoxAction : int { kBoxForward = 0, kBoxTurnLeft, kBoxTurnRight, kBoxStay };
inline constexpr int kBoxActions = 4;

enum BoxDir : int { kFaceNorth = 0, kFaceEast, kFaceSouth, kFaceWest };

/// Grid geometry and initial box placement. The large box occupies
/// `large` and the cell to its east. Agents start below `box_row`.
struct BoxGeometry {
  int rows = 6;
  int cols = 6;
  int goal_row = 0;
  std::array<Cell, 2> small{{{2, 0}, {2, 5}}};
  Cell large{2, 2};
  std::array<Cell, 2> agent_start{{{4, 0}, {4, 5}}};
  std::array<int, 2> agent_start_dir{{kFaceEast, kFaceWest}};

  static BoxGeometry standard() { return {}; }
  /// 4x4 variant used for exhaustive rule checks.
  static BoxGeometry reduced() { return {4, 4, 0, {{{2, 0}, {2, 3}}}, {2, 1}, {{{3, 0}, {3, 3}}}, {{kFaceNorth, kFaceNorth}}}; }
};

struct BoxAgent {
  Cell pos;
  int dir = kFaceNorth;
  bool operator==(const BoxAgent&) const = default;
};

struct BoxWorld {
  std::array<BoxAgent, 2> agents;
  std::array<Cell, 2> small;
  Cell large;  // west cell
  bool operator==(const BoxWorld&) const = default;
};

inline constexpr double kBoxStepCost = -0.1;
inline constexpr double kBoxPenalty = -5.0;
inline constexpr double kSmallBoxReward = 10.0;
inline constexpr double kLargeBoxReward = 100.0;

Cell box_heading(int dir);

/// One-hot over (small box, large box, empty, wall, teammate) for the cell ahead.
void box_observe(const BoxGeometry& geo, const BoxWorld& world, int agent, std::span<double> out);
Vec box_observe(const BoxGeometry& geo, const BoxWorld& world, int agent);

/// Raw 12-value encoding: per agent (row, col, dir), small boxes, large box west cell.
Vec box_global_state(const BoxWorld& world);

struct BoxOutcome {
  std::array<double, 2> rewards{};
  bool terminated = false;
};

/// A joint push moves the large box when both agents issue Forward, face the
/// same vertical direction and stand on the two cells directly behind it.
/// Remaining Forward actions resolve one agent at a time in index order.
BoxOutcome box_step(const BoxGeometry& geo, BoxWorld& world, std::span<const int> actions);

BoxWorld box_spawn(const BoxGeometry& geo, bool random_init, RngStream& rng);

class BoxPushingEnv final : public Environment {
 public:
  explicit BoxPushingEnv(const EnvConfig& config, BoxGeometry geometry = BoxGeometry::standard());

  const BoxGeometry& geometry() const { return geo_; }
  const BoxWorld& world() const { return world_; }
  void set_world(const BoxWorld& world) {
    world_ = world;
    refresh();
  }

  std::string render() const override;

 protected:
  void on_reset(RngStream& rng) override;
  Transition on_step(std::span<const int> actions, RngStream& rng) override;
  void observe(std::vector<Vec>& obs, Vec& state, RngStream& rng) override;

 private:
  BoxGeometry geo_;
  bool random_init_ = true;
  BoxWorld world_;
};

}  // namespace cmarl::env

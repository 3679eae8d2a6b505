#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cmarl/core/env.hpp"
#include "cmarl/envs/grid.hpp"

namespace cmarl::env {

/// Linear sequence of rooms stacked north to south.
///
/// ASCII legend: '#' wall, '.' floor, 'a'+k plate k, 'A'+k door k, 'G' chest.
/// Rows consisting solely of walls and doors separate rooms; rooms are
/// numbered from the south (room 0 is the spawn room). Plate k lies in
/// room k and opens door k; the chest lies in the last room.
struct PlateLayout {
  int rows = 0;
  int cols = 0;
  std::vector<bool> wall;             // row-major
  std::vector<std::vector<Cell>> plates;  // by plate id
  std::vector<std::vector<Cell>> doors;   // by door id
  Cell goal;
  std::vector<int> room_of_row;  // separator rows belong to the room below
  int n_rooms = 0;

  static PlateLayout parse(std::string_view ascii);
  std::string to_ascii() const;
  bool is_wall(Cell c) const { return wall[static_cast<std::size_t>(c.row * cols + c.col)]; }
  int room_of(Cell c) const { return room_of_row[static_cast<std::size_t>(c.row)]; }
};

/// Built-in layout for N agents (N in {4, 5, 6}): 9 columns, 4N-1 rows.
PlateLayout pressure_plate_layout(int n_agents);

/// Parses "pressureplate-linear-{4|5|6}p-v0".
int parse_pressure_plate_key(std::string_view key);

enum PlateAction : int { kPlateUp = 0, kPlateDown, kPlateLeft, kPlateRight, kPlateNoop };
inline constexpr int kPlateActions = 5;

struct PlateWorld {
  std::vector<Cell> agents;
  bool operator==(const PlateWorld&) const = default;
};

inline int plate_obs_dim(int sight) { return 5 * sight * sight + 2; }

/// Door k is open iff any agent stands on a cell of plate k.
std::vector<bool> plate_doors_open(const PlateLayout& layout, const PlateWorld& world);

void plate_observe(const PlateLayout& layout, const PlateWorld& world, int agent, int sight,
                   std::span<double> out);
Vec plate_observe(const PlateLayout& layout, const PlateWorld& world, int agent, int sight);

/// Agents move in index order; returns true when the last agent sits on the chest.
bool plate_step(const PlateLayout& layout, PlateWorld& world, std::span<const int> actions);

double plate_reward(const PlateLayout& layout, const PlateWorld& world, int agent);

PlateWorld plate_spawn(const PlateLayout& layout, int n_agents, RngStream& rng);

class PressurePlateEnv final : public Environment {
 public:
  explicit PressurePlateEnv(const EnvConfig& config);

  const PlateLayout& layout() const { return layout_; }
  const PlateWorld& world() const { return world_; }
  int sight() const { return sight_; }
  void set_world(const PlateWorld& world) {
    world_ = world;
    refresh();
  }

  std::string render() const override;

 protected:
  void on_reset(RngStream& rng) override;
  Transition on_step(std::span<const int> actions, RngStream& rng) override;
  void observe(std::vector<Vec>& obs, Vec& state, RngStream& rng) override;

 private:
  int n_ = 4;
  int sight_ = 5;
  PlateLayout layout_;
  PlateWorld world_;
};

}  // namespace cmarl::env

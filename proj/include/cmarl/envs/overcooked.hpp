#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cmarl/core/env.hpp"
#include "cmarl/envs/grid.hpp"

namespace cmarl::env {

/// Kitchen terrain. ASCII legend: 'X' counter, 'O' onion dispenser,
/// 'T' tomato dispenser, 'D' dish dispenser, 'P' pot, 'S' serving window,
/// ' ' floor, '1'/'2' floor cells where the players start facing north.
struct KitchenLayout {
  int rows = 0;
  int cols = 0;
  std::string terrain;  // row-major, player digits replaced by ' '
  std::array<Cell, 2> start{};

  static KitchenLayout parse(std::string_view ascii);
  std::string to_ascii() const;
  char at(Cell c) const {
    return in_bounds(c, rows, cols) ? terrain[static_cast<std::size_t>(c.row * cols + c.col)] : 'X';
  }
  std::vector<Cell> cells_of(char kind) const;
};

KitchenLayout cramped_room_layout();

enum OvercookedAction : int { kCookNorth = 0, kCookSouth, kCookEast, kCookWest, kCookNoop, kCookInteract };
inline constexpr int kCookActions = 6;
/// Facing index matches the orientation one-hot (north, south, east, west).
enum Facing : int { kNorth = 0, kSouth, kEast, kWest };

enum class ItemKind : int { Onion = 0, Soup, Dish, Tomato };

struct Item {
  ItemKind kind = ItemKind::Onion;
  int onions = 0;  // soup ingredients
  int tomatoes = 0;
  bool operator==(const Item&) const = default;
};

struct Chef {
  Cell pos;
  int facing = kNorth;
  std::optional<Item> held;
  bool operator==(const Chef&) const = default;
};

struct Pot {
  Cell pos;
  int onions = 0;
  int tomatoes = 0;
  bool cooking = false;
  int remaining = 0;  // ticks left while cooking
  bool ready() const { return cooking && remaining == 0; }
  int ingredients() const { return onions + tomatoes; }
  bool operator==(const Pot&) const = default;
};

struct KitchenState {
  std::array<Chef, 2> chefs;
  std::vector<Pot> pots;  // row-major order of the pot cells
  std::map<int, Item> counters;  // cell index -> item lying there
  bool operator==(const KitchenState&) const = default;
};

struct KitchenRules {
  int cook_time = 20;
  int pot_capacity = 3;
  double soup_value = 20.0;  // exactly pot_capacity onions
  bool shaped = false;
  double onion_in_pot_bonus = 3.0;
  double dish_pickup_bonus = 3.0;
  double soup_pickup_bonus = 5.0;
};

inline constexpr int kChefFeatures = 46;
inline constexpr int kOvercookedObsDim = 2 * kChefFeatures + 4;

Cell facing_offset(int facing);

/// Per-chef block: orientation(4), held item(4), closest onion, tomato, dish
/// and soup (dx, dy), soup onion/tomato counts, closest serving and empty
/// counter (dx, dy), two closest-pot blocks of 10, wall bits(4).
void chef_features(const KitchenLayout& layout, const KitchenState& state, int chef, std::span<double> out);

/// [own block, other block, other - own position, own (x, y)]; x is the column.
void overcooked_featurize(const KitchenLayout& layout, const KitchenState& state, int chef,
                          std::span<double> out);
Vec overcooked_featurize(const KitchenLayout& layout, const KitchenState& state, int chef);

struct KitchenOutcome {
  std::array<double, 2> rewards{};
  int deliveries = 0;
  int onions_added = 0;
};

/// Interactions resolve first (chef 0 then chef 1), then movement with
/// collision and swap blocking, then the pot timers tick.
KitchenOutcome overcooked_step(const KitchenLayout& layout, const KitchenRules& rules, KitchenState& state,
                               std::span<const int> actions);

KitchenState overcooked_initial_state(const KitchenLayout& layout);

class OvercookedEnv final : public Environment {
 public:
  explicit OvercookedEnv(const EnvConfig& config);

  const KitchenLayout& layout() const { return layout_; }
  const KitchenRules& rules() const { return rules_; }
  const KitchenState& kitchen() const { return state_; }
  void set_kitchen(const KitchenState& state) {
    state_ = state;
    refresh();
  }

  std::string render() const override;

 protected:
  void on_reset(RngStream& rng) override;
  Transition on_step(std::span<const int> actions, RngStream& rng) override;
  void observe(std::vector<Vec>& obs, Vec& state, RngStream& rng) override;

 private:
  KitchenLayout layout_;
  KitchenRules rules_;
  KitchenState state_;
};

}  // namespace cmarl::env

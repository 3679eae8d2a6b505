#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cmarl/core/env.hpp"

namespace cmarl::env {

using Vec2 = std::array<double, 2>;

struct SpreadPhysics {
  double dt = 0.1;
  double damping = 0.25;
  double accel = 5.0;           // action force gain
  double agent_radius = 0.15;
  double landmark_radius = 0.05;
  double max_speed = 0.0;       // <= 0: unbounded
  double contact_force = 100.0;
  double contact_margin = 1e-3;
};

struct ParticleWorld {
  std::vector<Vec2> pos;
  std::vector<Vec2> vel;
  std::vector<Vec2> landmarks;

  bool operator==(const ParticleWorld&) const = default;
};

enum SpreadAction : int { kSpreadNoop = 0, kSpreadLeft, kSpreadRight, kSpreadDown, kSpreadUp };
inline constexpr int kSpreadActions = 5;

/// Observation length for N agents: velocity, position, N landmark offsets,
/// N-1 teammate offsets, and 2(N-1) communication slots that are always 0.
inline int spread_obs_dim(int n) { return 6 * n; }

/// Parses "mpe:SimpleSpread-{N}-v0" (prefix optional); N in {3,4,5,8}.
int parse_spread_key(std::string_view key);

void spread_observe(const ParticleWorld& world, int agent, std::span<double> out);
Vec spread_observe(const ParticleWorld& world, int agent);

/// Shared coverage term plus -1 per overlapping teammate, per agent.
Vec spread_reward(const ParticleWorld& world, const SpreadPhysics& physics);

/// Integrates one tick and returns per-agent rewards of the new world.
Vec spread_step(ParticleWorld& world, const SpreadPhysics& physics, std::span<const int> actions);

ParticleWorld spread_spawn(int n_agents, RngStream& rng);

class SpreadEnv final : public Environment {
 public:
  explicit SpreadEnv(const EnvConfig& config);

  const ParticleWorld& world() const { return world_; }
  const SpreadPhysics& physics() const { return physics_; }
  void set_world(const ParticleWorld& world) {
    world_ = world;
    refresh();
  }

  std::string render() const override;

 protected:
  void on_reset(RngStream& rng) override;
  Transition on_step(std::span<const int> actions, RngStream& rng) override;
  void observe(std::vector<Vec>& obs, Vec& state, RngStream& rng) override;

 private:
  int n_ = 3;
  SpreadPhysics physics_;
  ParticleWorld world_;
};

}  // namespace cmarl::env

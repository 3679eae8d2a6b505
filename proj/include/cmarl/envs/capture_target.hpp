#pragma once

#include <span>
#include <string>
#include <vector>

#include "cmarl/core/env.hpp"
#include "cmarl/envs/grid.hpp"

namespace cmarl::env {

enum CaptureAction : int { kCaptureNorth = 0, kCaptureSouth, kCaptureWest, kCaptureEast, kCaptureStay };
inline constexpr int kCaptureActions = 5;

struct CaptureParams {
  int rows = 6;
  int cols = 6;
  bool obs_one_hot = false;
  double target_flick_prob = 0.3;
  bool tgt_avoid_agent = true;
  double tgt_trans_noise = 0.0;
  double agent_trans_noise = 0.1;
  double position_scale = 2.5;  // coordinates are divided by this
};

struct CaptureState {
  std::vector<Cell> agents;
  Cell target;
  bool operator==(const CaptureState&) const = default;
};

/// Cell reached by `action` from `from`. The grid wraps around at every edge.
Cell capture_move(const CaptureParams& params, Cell from, int action);

/// Length 4: (x, y, target_x, target_y) scaled, or 2·rows·cols one-hot cells.
/// A flickered target reads (-1, -1), or an all-zero block in one-hot mode.
int capture_obs_dim(const CaptureParams& params);
void capture_encode(const CaptureParams& params, Cell self, Cell target, bool target_visible,
                    std::span<double> out);

/// Draws the flicker mask and writes the observation for `agent`.
void capture_observe(const CaptureParams& params, const CaptureState& state, int agent, RngStream& rng,
                     std::span<double> out);

/// Returns true on capture (every agent on the target cell). Capture is
/// tested after the agents move and again after the target moves. A noisy
/// move slips to one of the two perpendicular directions; Stay never slips.
/// The avoiding target maximises its distance from the nearest agent.
bool capture_step(const CaptureParams& params, CaptureState& state, std::span<const int> actions,
                  RngStream& rng);

/// Target first, then agents; cells are drawn independently and may coincide.
CaptureState capture_spawn(const CaptureParams& params, int n_agents, RngStream& rng);

class CaptureTargetEnv final : public Environment {
 public:
  explicit CaptureTargetEnv(const EnvConfig& config);

  const CaptureParams& params() const { return params_; }
  const CaptureState& world() const { return world_; }
  void set_world(const CaptureState& world) {
    world_ = world;
    refresh();
  }

  std::string render() const override;

 protected:
  void on_reset(RngStream& rng) override;
  Transition on_step(std::span<const int> actions, RngStream& rng) override;
  void observe(std::vector<Vec>& obs, Vec& state, RngStream& rng) override;

 private:
  CaptureParams params_;
  CaptureState world_;
};

}  // namespace cmarl::env

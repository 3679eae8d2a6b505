#include "cmarl/envs/capture_target.hpp"

#include <algorithm>

#include "cmarl/core/errors.hpp"

namespace cmarl::env {

namespace {

constexpr Cell kMoves[kCaptureActions] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}, {0, 0}};
// Slip targets per action: {left of intended, right of intended}.
constexpr int kSlip[kCaptureActions][2] = {{kCaptureWest, kCaptureEast},
                                           {kCaptureEast, kCaptureWest},
                                           {kCaptureSouth, kCaptureNorth},
                                           {kCaptureNorth, kCaptureSouth},
                                           {kCaptureStay, kCaptureStay}};

bool all_on_target(const CaptureState& s) {
  return std::all_of(s.agents.begin(), s.agents.end(), [&](Cell a) { return a == s.target; });
}

int squared_distance(Cell a, Cell b) {
  const int dr = a.row - b.row, dc = a.col - b.col;
  return dr * dr + dc * dc;
}

int noisy_action(int action, double noise, RngStream& rng) {
  const double u = rng.uniform();
  if (u < noise / 2) return kSlip[action][0];
  if (u >= 1.0 - noise / 2) return kSlip[action][1];
  return action;
}

}  // namespace

Cell capture_move(const CaptureParams& params, Cell from, int action) {
  const Cell to = from + kMoves[action];
  return {(to.row + params.rows) % params.rows, (to.col + params.cols) % params.cols};
}

int capture_obs_dim(const CaptureParams& params) {
  return params.obs_one_hot ? 2 * params.rows * params.cols : 4;
}

void capture_encode(const CaptureParams& params, Cell self, Cell target, bool target_visible,
                    std::span<double> out) {
  if (params.obs_one_hot) {
    std::fill(out.begin(), out.end(), 0.0);
    const int area = params.rows * params.cols;
    out[static_cast<std::size_t>(self.row * params.cols + self.col)] = 1.0;
    if (target_visible) out[static_cast<std::size_t>(area + target.row * params.cols + target.col)] = 1.0;
    return;
  }
  out[0] = self.col / params.position_scale;
  out[1] = self.row / params.position_scale;
  out[2] = target_visible ? target.col / params.position_scale : -1.0;
  out[3] = target_visible ? target.row / params.position_scale : -1.0;
}

void capture_observe(const CaptureParams& params, const CaptureState& state, int agent, RngStream& rng,
                     std::span<double> out) {
  const bool visible = !rng.bernoulli(params.target_flick_prob);
  capture_encode(params, state.agents[static_cast<std::size_t>(agent)], state.target, visible, out);
}

bool capture_step(const CaptureParams& params, CaptureState& state, std::span<const int> actions,
                  RngStream& rng) {
  for (std::size_t i = 0; i < state.agents.size(); ++i) {
    state.agents[i] = capture_move(params, state.agents[i], noisy_action(actions[i], params.agent_trans_noise, rng));
  }
  if (all_on_target(state)) return true;

  int target_action = kCaptureStay;
  if (params.tgt_avoid_agent) {
    // Flee the nearest agent; distances ignore the wrap-around.
    std::size_t nearest = 0;
    for (std::size_t i = 1; i < state.agents.size(); ++i) {
      if (squared_distance(state.agents[i], state.target) < squared_distance(state.agents[nearest], state.target)) {
        nearest = i;
      }
    }
    int best = -1;
    int candidates[kCaptureActions];
    int n_best = 0;
    for (int a = 0; a < kCaptureActions; ++a) {
      const int d = squared_distance(state.agents[nearest], capture_move(params, state.target, a));
      if (d > best) {
        best = d;
        n_best = 0;
      }
      if (d == best) candidates[n_best++] = a;
    }
    target_action = n_best > 1 ? candidates[rng.below(static_cast<std::uint32_t>(n_best))] : candidates[0];
  } else {
    target_action = static_cast<int>(rng.below(kCaptureActions));
  }
  state.target = capture_move(params, state.target, noisy_action(target_action, params.tgt_trans_noise, rng));
  return all_on_target(state);
}

CaptureState capture_spawn(const CaptureParams& params, int n_agents, RngStream& rng) {
  auto cell = [&] {
    const int row = static_cast<int>(rng.below(static_cast<std::uint32_t>(params.rows)));
    return Cell{row, static_cast<int>(rng.below(static_cast<std::uint32_t>(params.cols)))};
  };
  CaptureState s;
  s.target = cell();
  for (int i = 0; i < n_agents; ++i) s.agents.push_back(cell());
  return s;
}

namespace {

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) raise(ErrorCode::BadExtra, std::string(name) + " must lie in [0, 1]");
}

}  // namespace

CaptureTargetEnv::CaptureTargetEnv(const EnvConfig& config) : Environment(config, 60) {
  if (config.key != "CaptureTarget-6x6-1t-2a-v0") {
    raise(ErrorCode::UnknownKey, "unrecognized capture target key '" + config.key + "'");
  }
  ExtrasReader extras(config.extras);
  params_.obs_one_hot = extras.get_bool("obs_one_hot", false);
  params_.target_flick_prob = extras.get_double("target_flick_prob", 0.3);
  params_.tgt_avoid_agent = extras.get_bool("tgt_avoid_agent", true);
  params_.tgt_trans_noise = extras.get_double("tgt_trans_noise", 0.0);
  params_.agent_trans_noise = extras.get_double("agent_trans_noise", 0.1);
  params_.position_scale = extras.get_double("position_scale", 2.5);
  extras.finish();
  check_probability(params_.target_flick_prob, "target_flick_prob");
  check_probability(params_.tgt_trans_noise, "tgt_trans_noise");
  check_probability(params_.agent_trans_noise, "agent_trans_noise");
  if (!(params_.position_scale > 0.0)) raise(ErrorCode::BadExtra, "position_scale must be positive");
  const int dim = capture_obs_dim(params_);
  set_spec(2, kCaptureActions, dim, 2 * dim);
}

void CaptureTargetEnv::on_reset(RngStream& rng) { world_ = capture_spawn(params_, 2, rng); }

Environment::Transition CaptureTargetEnv::on_step(std::span<const int> actions, RngStream& rng) {
  Transition t;
  t.terminated = capture_step(params_, world_, actions, rng);
  const double share = t.terminated ? 1.0 / static_cast<double>(world_.agents.size()) : 0.0;
  t.agent_rewards.assign(world_.agents.size(), share);
  t.extras["captured"] = t.terminated ? 1.0 : 0.0;
  return t;
}

void CaptureTargetEnv::observe(std::vector<Vec>& obs, Vec& state, RngStream& rng) {
  const auto dim = static_cast<std::size_t>(capture_obs_dim(params_));
  for (std::size_t i = 0; i < world_.agents.size(); ++i) {
    capture_observe(params_, world_, static_cast<int>(i), rng, obs[i]);
    capture_encode(params_, world_.agents[i], world_.target, true,
                   std::span<double>(state).subspan(i * dim, dim));
  }
}

std::string CaptureTargetEnv::render() const {
  std::string out;
  for (int r = 0; r < params_.rows; ++r) {
    for (int c = 0; c < params_.cols; ++c) {
      char ch = '.';
      if (world_.target == Cell{r, c}) ch = 'T';
      for (std::size_t i = 0; i < world_.agents.size(); ++i) {
        if (world_.agents[i] == Cell{r, c}) ch = ch == 'T' ? '*' : static_cast<char>('0' + static_cast<int>(i));
      }
      out += ch;
    }
    out += '\n';
  }
  return out;
}

}  // namespace cmarl::env

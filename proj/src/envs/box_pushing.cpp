#include "cmarl/envs/box_pushing.hpp"

#include <algorithm>

#include "cmarl/core/errors.hpp"

namespace cmarl::env {

namespace {

enum class Occupant { Small, Large, Empty, Wall, Teammate };

Occupant occupant(const BoxGeometry& geo, const BoxWorld& w, int agent, Cell c) {
  if (!in_bounds(c, geo.rows, geo.cols)) return Occupant::Wall;
  if (c == w.small[0] || c == w.small[1]) return Occupant::Small;
  if (c == w.large || c == w.large + Cell{0, 1}) return Occupant::Large;
  if (c == w.agents[static_cast<std::size_t>(1 - agent)].pos) return Occupant::Teammate;
  return Occupant::Empty;
}

bool cell_free(const BoxGeometry& geo, const BoxWorld& w, Cell c) {
  if (!in_bounds(c, geo.rows, geo.cols)) return false;
  if (c == w.small[0] || c == w.small[1]) return false;
  if (c == w.large || c == w.large + Cell{0, 1}) return false;
  return c != w.agents[0].pos && c != w.agents[1].pos;
}

}  // namespace

Cell box_heading(int dir) {
  switch (dir) {
    case kFaceNorth: return {-1, 0};
    case kFaceEast: return {0, 1};
    case kFaceSouth: return {1, 0};
    default: return {0, -1};
  }
}

void box_observe(const BoxGeometry& geo, const BoxWorld& world, int agent, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const BoxAgent& self = world.agents[static_cast<std::size_t>(agent)];
  out[static_cast<std::size_t>(occupant(geo, world, agent, self.pos + box_heading(self.dir)))] = 1.0;
}

Vec box_observe(const BoxGeometry& geo, const BoxWorld& world, int agent) {
  Vec out(5);
  box_observe(geo, world, agent, out);
  return out;
}

Vec box_global_state(const BoxWorld& world) {
  Vec s;
  s.reserve(12);
  for (const BoxAgent& a : world.agents) {
    s.push_back(a.pos.row);
    s.push_back(a.pos.col);
    s.push_back(a.dir);
  }
  for (Cell c : world.small) {
    s.push_back(c.row);
    s.push_back(c.col);
  }
  s.push_back(world.large.row);
  s.push_back(world.large.col);
  return s;
}

BoxOutcome box_step(const BoxGeometry& geo, BoxWorld& world, std::span<const int> actions) {
  BoxOutcome out;
  out.rewards = {kBoxStepCost, kBoxStepCost};

  for (std::size_t i = 0; i < 2; ++i) {
    if (actions[i] == kBoxTurnLeft) world.agents[i].dir = (world.agents[i].dir + 3) % 4;
    if (actions[i] == kBoxTurnRight) world.agents[i].dir = (world.agents[i].dir + 1) % 4;
  }

  const BoxAgent& a0 = world.agents[0];
  const BoxAgent& a1 = world.agents[1];
  bool joint = false;
  if (actions[0] == kBoxForward && actions[1] == kBoxForward && a0.dir == a1.dir &&
      (a0.dir == kFaceNorth || a0.dir == kFaceSouth)) {
    const Cell d = box_heading(a0.dir);
    const Cell behind_w{world.large.row - d.row, world.large.col};
    const Cell behind_e{world.large.row - d.row, world.large.col + 1};
    joint = (a0.pos == behind_w && a1.pos == behind_e) || (a0.pos == behind_e && a1.pos == behind_w);
    if (joint) {
      const Cell dest = world.large + d;
      const Cell dest_e = dest + Cell{0, 1};
      const bool clear = in_bounds(dest, geo.rows, geo.cols) && in_bounds(dest_e, geo.rows, geo.cols) &&
                         dest != world.small[0] && dest != world.small[1] && dest_e != world.small[0] &&
                         dest_e != world.small[1];
      if (clear) {
        world.large = dest;
        world.agents[0].pos = world.agents[0].pos + d;
        world.agents[1].pos = world.agents[1].pos + d;
        if (dest.row == geo.goal_row) {
          out.rewards[0] += kLargeBoxReward;
          out.rewards[1] += kLargeBoxReward;
          out.terminated = true;
        }
      }
    }
  }
  if (joint) return out;

  for (std::size_t i = 0; i < 2; ++i) {
    if (actions[i] != kBoxForward) continue;
    BoxAgent& self = world.agents[i];
    const Cell d = box_heading(self.dir);
    const Cell ahead = self.pos + d;
    switch (occupant(geo, world, static_cast<int>(i), ahead)) {
      case Occupant::Wall:
      case Occupant::Large:
        out.rewards[i] += kBoxPenalty;
        break;
      case Occupant::Teammate:
        break;
      case Occupant::Empty:
        self.pos = ahead;
        break;
      case Occupant::Small: {
        Cell& box = world.small[ahead == world.small[0] ? 0 : 1];
        const Cell dest = ahead + d;
        if (!cell_free(geo, world, dest)) break;
        box = dest;
        self.pos = ahead;
        if (dest.row == geo.goal_row) {
          out.rewards[i] += kSmallBoxReward;
          out.terminated = true;
        }
        break;
      }
    }
  }
  return out;
}

BoxWorld box_spawn(const BoxGeometry& geo, bool random_init, RngStream& rng) {
  BoxWorld w;
  w.small = geo.small;
  w.large = geo.large;
  if (!random_init) {
    w.agents[0] = {geo.agent_start[0], geo.agent_start_dir[0]};
    w.agents[1] = {geo.agent_start[1], geo.agent_start_dir[1]};
    return w;
  }
  const int first_row = std::max({geo.small[0].row, geo.small[1].row, geo.large.row}) + 1;
  std::vector<Cell> cells;
  for (int r = first_row; r < geo.rows; ++r) {
    for (int c = 0; c < geo.cols; ++c) cells.push_back({r, c});
  }
  if (cells.size() < 2) raise(ErrorCode::UnsatisfiableSpawn, "no room below the boxes for two agents");
  rng.shuffle(std::span<Cell>(cells));
  for (std::size_t i = 0; i < 2; ++i) {
    w.agents[i].pos = cells[i];
    w.agents[i].dir = static_cast<int>(rng.below(4));
  }
  return w;
}

BoxPushingEnv::BoxPushingEnv(const EnvConfig& config, BoxGeometry geometry)
    : Environment(config, 60), geo_(geometry) {
  if (config.key != "BoxPushing-6x6-2a-v0") {
    raise(ErrorCode::UnknownKey, "unrecognized box pushing key '" + config.key + "'");
  }
  ExtrasReader extras(config.extras);
  random_init_ = extras.get_bool("random_init", true);
  extras.finish();
  set_spec(2, kBoxActions, 5, 12);
}

void BoxPushingEnv::on_reset(RngStream& rng) { world_ = box_spawn(geo_, random_init_, rng); }

Environment::Transition BoxPushingEnv::on_step(std::span<const int> actions, RngStream&) {
  const BoxOutcome o = box_step(geo_, world_, actions);
  Transition t;
  t.agent_rewards.assign(o.rewards.begin(), o.rewards.end());
  t.terminated = o.terminated;
  return t;
}

void BoxPushingEnv::observe(std::vector<Vec>& obs, Vec& state, RngStream&) {
  box_observe(geo_, world_, 0, obs[0]);
  box_observe(geo_, world_, 1, obs[1]);
  state = box_global_state(world_);
}

std::string BoxPushingEnv::render() const {
  static constexpr char kArrows[] = "^>v<";
  std::string out;
  for (int r = 0; r < geo_.rows; ++r) {
    for (int c = 0; c < geo_.cols; ++c) {
      const Cell cell{r, c};
      char ch = r == geo_.goal_row ? '_' : '.';
      if (cell == world_.small[0] || cell == world_.small[1]) ch = 'b';
      if (cell == world_.large || cell == world_.large + Cell{0, 1}) ch = 'B';
      for (const BoxAgent& a : world_.agents) {
        if (a.pos == cell) ch = kArrows[a.dir];
      }
      out += ch;
    }
    out += '\n';
  }
  return out;
}

}  // namespace cmarl::env

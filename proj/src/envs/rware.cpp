#include "cmarl/envs/rware.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

#include "cmarl/core/errors.hpp"

namespace cmarl::env {

WarehouseLayout WarehouseLayout::parse(std::string_view ascii) {
  WarehouseLayout layout;
  std::istringstream in{std::string(ascii)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (layout.cols == 0) layout.cols = static_cast<int>(line.size());
    if (static_cast<int>(line.size()) != layout.cols) {
      raise(ErrorCode::BadConfig, "ragged warehouse layout");
    }
    for (char ch : line) {
      if (ch != '.' && ch != 'x' && ch != 'g') {
        raise(ErrorCode::BadConfig, std::string("bad warehouse layout symbol '") + ch + "'");
      }
      layout.cells.push_back(static_cast<WarehouseCell>(ch));
    }
    ++layout.rows;
  }
  if (layout.rows == 0) raise(ErrorCode::BadConfig, "empty warehouse layout");
  return layout;
}

std::string WarehouseLayout::to_ascii() const {
  std::string out;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out += static_cast<char>(at({r, c}));
    out += '\n';
  }
  return out;
}

WarehouseLayout rware_builtin_layout(std::string_view size) {
  int shelf_rows = 0;
  constexpr int kShelfColumns = 3;
  constexpr int kColumnHeight = 8;
  if (size == "tiny") {
    shelf_rows = 1;
  } else if (size == "small") {
    shelf_rows = 2;
  } else {
    raise(ErrorCode::UnknownKey, "unknown warehouse size '" + std::string(size) + "'");
  }
  WarehouseLayout layout;
  layout.rows = (kColumnHeight + 1) * shelf_rows + 2;
  layout.cols = 3 * kShelfColumns + 1;
  layout.cells.assign(static_cast<std::size_t>(layout.rows * layout.cols), WarehouseCell::Highway);
  const int mid = layout.cols / 2;
  for (int y = 0; y < layout.rows; ++y) {
    for (int x = 0; x < layout.cols; ++x) {
      const bool highway = x % 3 == 0 || y % (kColumnHeight + 1) == 0 || y == layout.rows - 1 ||
                           (y > layout.rows - (kColumnHeight + 3) && (x == mid - 1 || x == mid));
      if (!highway) layout.cells[static_cast<std::size_t>(y * layout.cols + x)] = WarehouseCell::Rack;
    }
  }
  layout.cells[static_cast<std::size_t>((layout.rows - 1) * layout.cols + mid - 1)] = WarehouseCell::Goal;
  layout.cells[static_cast<std::size_t>((layout.rows - 1) * layout.cols + mid)] = WarehouseCell::Goal;
  return layout;
}

RwareTask parse_rware_key(std::string_view raw) {
  std::string key(raw);
  if (key.starts_with("rware:")) key = key.substr(6);
  static const std::regex grammar(R"(^rware-(tiny|small)-(\d+)ag(-easy|-hard)?-v1$)");
  std::smatch m;
  if (!std::regex_match(key, m, grammar)) {
    raise(ErrorCode::UnknownKey, "unrecognized RWARE key '" + std::string(raw) + "'");
  }
  RwareTask task;
  task.size = m[1].str();
  task.n_agents = std::stoi(m[2].str());
  if (task.n_agents < 1) raise(ErrorCode::UnknownKey, "RWARE key needs >= 1 agent");
  const std::string mode = m[3].matched ? m[3].str() : "";
  if (mode == "-hard") {
    task.request_queue_size = (task.n_agents + 1) / 2;
  } else if (mode == "-easy") {
    task.request_queue_size = 2 * task.n_agents;
  } else {
    task.request_queue_size = task.n_agents;
  }
  return task;
}

namespace {

constexpr Cell kHeading[4] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1}};

int turn_left(int dir) {
  switch (dir) {
    case kDirUp: return kDirLeft;
    case kDirLeft: return kDirDown;
    case kDirDown: return kDirRight;
    default: return kDirUp;
  }
}

int turn_right(int dir) {
  switch (dir) {
    case kDirUp: return kDirRight;
    case kDirRight: return kDirDown;
    case kDirDown: return kDirLeft;
    default: return kDirUp;
  }
}

}  // namespace

RwareGrids rware_grids(const WarehouseLayout& layout, const RwareState& state) {
  RwareGrids g;
  const auto n = static_cast<std::size_t>(layout.rows * layout.cols);
  g.robot.assign(n, -1);
  g.shelf.assign(n, -1);
  g.requested.assign(state.shelves.size(), false);
  for (std::size_t i = 0; i < state.robots.size(); ++i) {
    const Cell p = state.robots[i].pos;
    g.robot[static_cast<std::size_t>(p.row * layout.cols + p.col)] = static_cast<int>(i);
  }
  for (std::size_t s = 0; s < state.shelves.size(); ++s) {
    const Cell p = state.shelves[s];
    g.shelf[static_cast<std::size_t>(p.row * layout.cols + p.col)] = static_cast<int>(s);
  }
  for (int s : state.requests) g.requested[static_cast<std::size_t>(s)] = true;
  return g;
}

void rware_observe(const WarehouseLayout& layout, const RwareState& state, const RwareGrids& grids,
                   int agent, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const Robot& me = state.robots[static_cast<std::size_t>(agent)];
  out[0] = me.pos.col;
  out[1] = me.pos.row;
  out[2] = me.carrying >= 0 ? 1.0 : 0.0;
  out[static_cast<std::size_t>(3 + me.dir)] = 1.0;
  out[7] = layout.path_restricted(me.pos) ? 1.0 : 0.0;
  std::size_t at = 8;
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc, at += 7) {
      const Cell c{me.pos.row + dr, me.pos.col + dc};
      if (!in_bounds(c, layout.rows, layout.cols)) continue;
      const auto idx = static_cast<std::size_t>(c.row * layout.cols + c.col);
      if (const int r = grids.robot[idx]; r >= 0) {
        out[at] = 1.0;
        out[at + 1 + static_cast<std::size_t>(state.robots[static_cast<std::size_t>(r)].dir)] = 1.0;
      }
      if (const int s = grids.shelf[idx]; s >= 0) {
        out[at + 5] = 1.0;
        out[at + 6] = grids.requested[static_cast<std::size_t>(s)] ? 1.0 : 0.0;
      }
    }
  }
}

Vec rware_observe(const WarehouseLayout& layout, const RwareState& state, int agent) {
  Vec out(kRwareObsDim);
  rware_observe(layout, state, rware_grids(layout, state), agent, out);
  return out;
}

std::vector<int> rware_request_refresh(const std::vector<int>& queue, int delivered, int n_shelves,
                                       RngStream& rng) {
  std::vector<bool> excluded(static_cast<std::size_t>(n_shelves), false);
  for (int s : queue) excluded[static_cast<std::size_t>(s)] = true;
  excluded[static_cast<std::size_t>(delivered)] = true;
  std::vector<int> eligible;
  for (int s = 0; s < n_shelves; ++s) {
    if (!excluded[static_cast<std::size_t>(s)]) eligible.push_back(s);
  }
  std::vector<int> next = queue;
  auto it = std::find(next.begin(), next.end(), delivered);
  if (it == next.end()) raise(ErrorCode::BadId, "delivered shelf is not requested");
  if (eligible.empty()) return next;  // every other shelf is already requested
  *it = eligible[rng.below(static_cast<std::uint32_t>(eligible.size()))];
  return next;
}

Vec rware_step(const WarehouseLayout& layout, RwareState& state, std::span<const int> actions,
               RngStream& rng) {
  const std::size_t n = state.robots.size();
  Vec rewards(n, 0.0);
  RwareGrids grids = rware_grids(layout, state);
  auto index = [&](Cell c) { return static_cast<std::size_t>(c.row * layout.cols + c.col); };
  auto uncarried_shelf_at = [&](Cell c) {
    const int s = grids.shelf[index(c)];
    if (s < 0) return false;
    for (const Robot& r : state.robots) {
      if (r.carrying == s) return false;
    }
    return true;
  };

  for (std::size_t i = 0; i < n; ++i) {
    if (actions[i] == kRwareTurnLeft) state.robots[i].dir = turn_left(state.robots[i].dir);
    if (actions[i] == kRwareTurnRight) state.robots[i].dir = turn_right(state.robots[i].dir);
  }

  std::vector<bool> moving(n, false);
  std::vector<Cell> target(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (actions[i] != kRwareForward) continue;
    const Robot& r = state.robots[i];
    const Cell t = r.pos + kHeading[r.dir];
    if (!in_bounds(t, layout.rows, layout.cols)) continue;
    if (r.carrying >= 0 && uncarried_shelf_at(t)) continue;
    target[i] = t;
    moving[i] = true;
  }

  // Cancel contested, swapping, and blocked moves until nothing changes. Each
  // round judges every intent against the round's starting set, so all
  // contenders for one cell are cancelled together.
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<bool> cancel(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      if (!moving[i]) continue;
      for (std::size_t j = 0; j < n && !cancel[i]; ++j) {
        if (j == i) continue;
        if (moving[j] && target[j] == target[i]) cancel[i] = true;
        if (moving[j] && target[j] == state.robots[i].pos && target[i] == state.robots[j].pos) cancel[i] = true;
        if (!moving[j] && state.robots[j].pos == target[i]) cancel[i] = true;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (cancel[i]) {
        moving[i] = false;
        changed = true;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!moving[i]) continue;
    Robot& r = state.robots[i];
    r.pos = target[i];
    if (r.carrying >= 0) state.shelves[static_cast<std::size_t>(r.carrying)] = r.pos;
  }

  grids = rware_grids(layout, state);
  for (std::size_t i = 0; i < n; ++i) {
    if (actions[i] != kRwareToggleLoad) continue;
    Robot& r = state.robots[i];
    if (r.carrying < 0) {
      if (uncarried_shelf_at(r.pos)) r.carrying = grids.shelf[index(r.pos)];
    } else if (!layout.path_restricted(r.pos)) {
      r.carrying = -1;
    }
  }

  const int n_shelves = static_cast<int>(state.shelves.size());
  for (std::size_t i = 0; i < n; ++i) {
    const Robot& r = state.robots[i];
    if (r.carrying < 0 || layout.at(r.pos) != WarehouseCell::Goal) continue;
    if (std::find(state.requests.begin(), state.requests.end(), r.carrying) == state.requests.end()) continue;
    rewards[i] += 1.0;
    state.requests = rware_request_refresh(state.requests, r.carrying, n_shelves, rng);
  }
  return rewards;
}

RwareState rware_spawn(const WarehouseLayout& layout, int n_agents, int request_queue_size,
                       RngStream& rng) {
  RwareState state;
  for (int r = 0; r < layout.rows; ++r) {
    for (int c = 0; c < layout.cols; ++c) {
      if (layout.at({r, c}) == WarehouseCell::Rack) state.shelves.push_back({r, c});
    }
  }
  const int cells = layout.rows * layout.cols;
  if (n_agents > cells) raise(ErrorCode::UnsatisfiableSpawn, "more robots than cells");
  if (request_queue_size > static_cast<int>(state.shelves.size())) {
    raise(ErrorCode::BadConfig, "request queue larger than the shelf count");
  }
  std::vector<int> order(static_cast<std::size_t>(cells));
  for (int i = 0; i < cells; ++i) order[static_cast<std::size_t>(i)] = i;
  rng.shuffle(std::span<int>(order));
  for (int i = 0; i < n_agents; ++i) {
    Robot robot;
    const int idx = order[static_cast<std::size_t>(i)];
    robot.pos = {idx / layout.cols, idx % layout.cols};
    robot.dir = static_cast<int>(rng.below(4));
    state.robots.push_back(robot);
  }
  std::vector<int> shelf_ids(state.shelves.size());
  for (std::size_t s = 0; s < shelf_ids.size(); ++s) shelf_ids[s] = static_cast<int>(s);
  rng.shuffle(std::span<int>(shelf_ids));
  state.requests.assign(shelf_ids.begin(), shelf_ids.begin() + request_queue_size);
  return state;
}

namespace {

WarehouseLayout load_layout_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::BadExtra, "cannot open layout file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return WarehouseLayout::parse(buf.str());
}

}  // namespace

RwareEnv::RwareEnv(const EnvConfig& config) : Environment(config, 500), task_(parse_rware_key(config.key)) {
  ExtrasReader extras(config.extras);
  task_.request_queue_size =
      static_cast<int>(extras.get_int("request_queue_size", task_.request_queue_size));
  const std::string layout_path = extras.get_string("layout", "");
  extras.finish();
  if (task_.request_queue_size < 1) raise(ErrorCode::BadExtra, "request_queue_size must be >= 1");
  layout_ = layout_path.empty() ? rware_builtin_layout(task_.size) : load_layout_file(layout_path);
  set_spec(task_.n_agents, kRwareActions, kRwareObsDim, kRwareObsDim * task_.n_agents);
}

void RwareEnv::on_reset(RngStream& rng) {
  state_ = rware_spawn(layout_, task_.n_agents, task_.request_queue_size, rng);
}

Environment::Transition RwareEnv::on_step(std::span<const int> actions, RngStream& rng) {
  Transition t;
  t.agent_rewards = rware_step(layout_, state_, actions, rng);
  return t;
}

void RwareEnv::observe(std::vector<Vec>& obs, Vec& state, RngStream&) {
  const RwareGrids grids = rware_grids(layout_, state_);
  for (int i = 0; i < task_.n_agents; ++i) {
    rware_observe(layout_, state_, grids, i, obs[static_cast<std::size_t>(i)]);
    std::copy(obs[static_cast<std::size_t>(i)].begin(), obs[static_cast<std::size_t>(i)].end(),
              state.begin() + static_cast<std::ptrdiff_t>(i * kRwareObsDim));
  }
}

std::string RwareEnv::render() const {
  std::string ascii = layout_.to_ascii();
  auto at = [&](Cell c) -> char& { return ascii[static_cast<std::size_t>(c.row * (layout_.cols + 1) + c.col)]; };
  for (const Cell& s : state_.shelves) at(s) = 'S';
  for (int s : state_.requests) at(state_.shelves[static_cast<std::size_t>(s)]) = 'R';
  for (std::size_t i = 0; i < state_.robots.size(); ++i) {
    at(state_.robots[i].pos) = static_cast<char>((state_.robots[i].carrying >= 0 ? 'a' : 'A') + static_cast<int>(i % 26));
  }
  return ascii;
}

}  // namespace cmarl::env

#include "cmarl/envs/pressure_plate.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

#include "cmarl/core/errors.hpp"

namespace cmarl::env {

PlateLayout PlateLayout::parse(std::string_view ascii) {
  PlateLayout layout;
  std::vector<std::string> lines;
  std::istringstream in{std::string(ascii)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) raise(ErrorCode::BadConfig, "empty pressure plate layout");
  layout.rows = static_cast<int>(lines.size());
  layout.cols = static_cast<int>(lines[0].size());
  layout.wall.assign(static_cast<std::size_t>(layout.rows * layout.cols), false);
  bool have_goal = false;
  for (int r = 0; r < layout.rows; ++r) {
    if (static_cast<int>(lines[static_cast<std::size_t>(r)].size()) != layout.cols) {
      raise(ErrorCode::BadConfig, "ragged pressure plate layout");
    }
    for (int c = 0; c < layout.cols; ++c) {
      const char ch = lines[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
      if (ch == '#') {
        layout.wall[static_cast<std::size_t>(r * layout.cols + c)] = true;
      } else if (ch >= 'a' && ch <= 'z') {
        const auto id = static_cast<std::size_t>(ch - 'a');
        if (layout.plates.size() <= id) layout.plates.resize(id + 1);
        layout.plates[id].push_back({r, c});
      } else if (ch >= 'A' && ch <= 'Z' && ch != 'G') {
        const auto id = static_cast<std::size_t>(ch - 'A');
        if (layout.doors.size() <= id) layout.doors.resize(id + 1);
        layout.doors[id].push_back({r, c});
      } else if (ch == 'G') {
        layout.goal = {r, c};
        have_goal = true;
      } else if (ch != '.') {
        raise(ErrorCode::BadConfig, std::string("bad pressure plate symbol '") + ch + "'");
      }
    }
  }
  if (!have_goal) raise(ErrorCode::BadConfig, "pressure plate layout lacks a chest");
  if (layout.plates.size() != layout.doors.size()) {
    raise(ErrorCode::BadConfig, "every plate needs exactly one door id");
  }
  auto is_door = [&](Cell c) {
    for (const auto& cells : layout.doors) {
      if (std::find(cells.begin(), cells.end(), c) != cells.end()) return true;
    }
    return false;
  };
  layout.room_of_row.assign(static_cast<std::size_t>(layout.rows), 0);
  int room = 0;
  for (int r = layout.rows - 1; r >= 0; --r) {
    bool separator = true;
    for (int c = 0; c < layout.cols && separator; ++c) {
      separator = layout.is_wall({r, c}) || is_door({r, c});
    }
    layout.room_of_row[static_cast<std::size_t>(r)] = room;
    if (separator) ++room;
  }
  layout.n_rooms = room + 1;
  return layout;
}

std::string PlateLayout::to_ascii() const {
  std::string out;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      char ch = is_wall({r, c}) ? '#' : '.';
      for (std::size_t k = 0; k < plates.size(); ++k) {
        for (Cell p : plates[k]) {
          if (p == Cell{r, c}) ch = static_cast<char>('a' + static_cast<int>(k));
        }
        for (Cell d : doors[k]) {
          if (d == Cell{r, c}) ch = static_cast<char>('A' + static_cast<int>(k));
        }
      }
      if (goal == Cell{r, c}) ch = 'G';
      out += ch;
    }
    out += '\n';
  }
  return out;
}

PlateLayout pressure_plate_layout(int n_agents) {
  if (n_agents < 2 || n_agents > 26) raise(ErrorCode::UnknownKey, "unsupported pressure plate size");
  constexpr int kCols = 9;
  const int rows = 4 * n_agents - 1;
  std::vector<std::string> grid(static_cast<std::size_t>(rows), std::string(kCols, '.'));
  for (int room = 0; room < n_agents; ++room) {
    const int top = 4 * (n_agents - 1 - room);
    const int centre = top + 1;
    const bool even = room % 2 == 0;
    if (room < n_agents - 1) {
      // Plate on one side, the door to the next room in the wall above on the other.
      grid[static_cast<std::size_t>(centre)][even ? 1 : 7] = static_cast<char>('a' + room);
      std::string& wall = grid[static_cast<std::size_t>(top - 1)];
      wall = std::string(kCols, '#');
      wall[even ? 7 : 1] = static_cast<char>('A' + room);
    } else {
      grid[static_cast<std::size_t>(centre)][even ? 7 : 1] = 'G';
    }
  }
  std::string ascii;
  for (const std::string& row : grid) ascii += row + '\n';
  return PlateLayout::parse(ascii);
}

int parse_pressure_plate_key(std::string_view key) {
  static const std::regex grammar(R"(^pressureplate-linear-(4|5|6)p-v0$)");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_match(key.begin(), key.end(), m, grammar)) {
    raise(ErrorCode::UnknownKey, "unrecognized pressure plate key '" + std::string(key) + "'");
  }
  return std::stoi(m[1].str());
}

std::vector<bool> plate_doors_open(const PlateLayout& layout, const PlateWorld& world) {
  std::vector<bool> open(layout.doors.size(), false);
  for (std::size_t k = 0; k < layout.plates.size(); ++k) {
    for (Cell p : layout.plates[k]) {
      for (Cell a : world.agents) open[k] = open[k] || a == p;
    }
  }
  return open;
}

namespace {

int door_id_at(const PlateLayout& layout, Cell c) {
  for (std::size_t k = 0; k < layout.doors.size(); ++k) {
    for (Cell d : layout.doors[k]) {
      if (d == c) return static_cast<int>(k);
    }
  }
  return -1;
}

bool is_plate(const PlateLayout& layout, Cell c) {
  for (const auto& cells : layout.plates) {
    if (std::find(cells.begin(), cells.end(), c) != cells.end()) return true;
  }
  return false;
}

Cell heading(int action) {
  switch (action) {
    case kPlateUp: return {-1, 0};
    case kPlateDown: return {1, 0};
    case kPlateLeft: return {0, -1};
    case kPlateRight: return {0, 1};
    default: return {0, 0};
  }
}

Cell target_of(const PlateLayout& layout, int agent, int n_agents) {
  if (agent == n_agents - 1 || agent >= static_cast<int>(layout.plates.size())) return layout.goal;
  return layout.plates[static_cast<std::size_t>(agent)].front();
}

}  // namespace

void plate_observe(const PlateLayout& layout, const PlateWorld& world, int agent, int sight,
                   std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const Cell self = world.agents[static_cast<std::size_t>(agent)];
  const std::vector<bool> open = plate_doors_open(layout, world);
  const int half = sight / 2;
  const auto area = static_cast<std::size_t>(sight * sight);
  std::size_t cell = 0;
  for (int dr = -half; dr <= half; ++dr) {
    for (int dc = -half; dc <= half; ++dc, ++cell) {
      const Cell c{self.row + dr, self.col + dc};
      if (!in_bounds(c, layout.rows, layout.cols)) {
        out[area + cell] = 1.0;
        continue;
      }
      for (std::size_t j = 0; j < world.agents.size(); ++j) {
        if (static_cast<int>(j) != agent && world.agents[j] == c) out[cell] = 1.0;
      }
      if (layout.is_wall(c)) out[area + cell] = 1.0;
      if (is_plate(layout, c)) out[2 * area + cell] = 1.0;
      if (const int d = door_id_at(layout, c); d >= 0 && !open[static_cast<std::size_t>(d)]) {
        out[3 * area + cell] = 1.0;
      }
      if (layout.goal == c) out[4 * area + cell] = 1.0;
    }
  }
  out[5 * area] = self.col;
  out[5 * area + 1] = self.row;
}

Vec plate_observe(const PlateLayout& layout, const PlateWorld& world, int agent, int sight) {
  Vec out(static_cast<std::size_t>(plate_obs_dim(sight)));
  plate_observe(layout, world, agent, sight, out);
  return out;
}

bool plate_step(const PlateLayout& layout, PlateWorld& world, std::span<const int> actions) {
  const std::vector<bool> open = plate_doors_open(layout, world);
  for (std::size_t i = 0; i < world.agents.size(); ++i) {
    const Cell t = world.agents[i] + heading(actions[i]);
    if (t == world.agents[i]) continue;
    if (!in_bounds(t, layout.rows, layout.cols) || layout.is_wall(t)) continue;
    if (const int d = door_id_at(layout, t); d >= 0 && !open[static_cast<std::size_t>(d)]) continue;
    if (std::find(world.agents.begin(), world.agents.end(), t) != world.agents.end()) continue;
    world.agents[i] = t;
  }
  return world.agents.back() == layout.goal;
}

double plate_reward(const PlateLayout& layout, const PlateWorld& world, int agent) {
  const int n = static_cast<int>(world.agents.size());
  const Cell self = world.agents[static_cast<std::size_t>(agent)];
  const Cell target = target_of(layout, agent, n);
  const int here = layout.room_of(self);
  const int there = layout.room_of(target);
  if (here == there) {
    return -static_cast<double>(manhattan(self, target)) / static_cast<double>(layout.rows + layout.cols);
  }
  return -static_cast<double>(std::abs(here - there));
}

PlateWorld plate_spawn(const PlateLayout& layout, int n_agents, RngStream& rng) {
  std::vector<Cell> free;
  for (int r = 0; r < layout.rows; ++r) {
    for (int c = 0; c < layout.cols; ++c) {
      const Cell cell{r, c};
      if (layout.room_of(cell) != 0 || layout.is_wall(cell)) continue;
      if (is_plate(layout, cell) || door_id_at(layout, cell) >= 0 || layout.goal == cell) continue;
      free.push_back(cell);
    }
  }
  if (static_cast<int>(free.size()) < n_agents) {
    raise(ErrorCode::UnsatisfiableSpawn, "spawn room too small for the agents");
  }
  rng.shuffle(std::span<Cell>(free));
  PlateWorld world;
  world.agents.assign(free.begin(), free.begin() + n_agents);
  return world;
}

namespace {

PlateLayout load_layout_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::BadExtra, "cannot open layout file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return PlateLayout::parse(buf.str());
}

}  // namespace

PressurePlateEnv::PressurePlateEnv(const EnvConfig& config)
    : Environment(config, 500), n_(parse_pressure_plate_key(config.key)) {
  ExtrasReader extras(config.extras);
  sight_ = static_cast<int>(extras.get_int("sight", 5));
  const std::string path = extras.get_string("layout", "");
  extras.finish();
  if (sight_ < 1 || sight_ % 2 == 0) raise(ErrorCode::BadExtra, "sight must be a positive odd integer");
  layout_ = path.empty() ? pressure_plate_layout(n_) : load_layout_file(path);
  const int dim = plate_obs_dim(sight_);
  set_spec(n_, kPlateActions, dim, dim * n_);
}

void PressurePlateEnv::on_reset(RngStream& rng) { world_ = plate_spawn(layout_, n_, rng); }

Environment::Transition PressurePlateEnv::on_step(std::span<const int> actions, RngStream&) {
  Transition t;
  t.terminated = plate_step(layout_, world_, actions);
  t.agent_rewards.resize(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) t.agent_rewards[static_cast<std::size_t>(i)] = plate_reward(layout_, world_, i);
  return t;
}

void PressurePlateEnv::observe(std::vector<Vec>& obs, Vec& state, RngStream&) {
  const auto dim = static_cast<std::size_t>(plate_obs_dim(sight_));
  for (int i = 0; i < n_; ++i) {
    auto& o = obs[static_cast<std::size_t>(i)];
    plate_observe(layout_, world_, i, sight_, o);
    std::copy(o.begin(), o.end(), state.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(i) * dim));
  }
}

std::string PressurePlateEnv::render() const {
  std::string ascii = layout_.to_ascii();
  for (std::size_t i = 0; i < world_.agents.size(); ++i) {
    const Cell c = world_.agents[i];
    ascii[static_cast<std::size_t>(c.row * (layout_.cols + 1) + c.col)] = static_cast<char>('0' + static_cast<int>(i % 10));
  }
  return ascii;
}

}  // namespace cmarl::env

#pragma once
// Second, deliberately plain implementations of the environment rules. They
// share data types with the library but none of its logic, and are used to
// cross-check transitions, rewards and observations.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "cmarl/core/rng.hpp"
#include "cmarl/envs/box_pushing.hpp"
#include "cmarl/envs/capture_target.hpp"
#include "cmarl/envs/lbf.hpp"
#include "cmarl/envs/overcooked.hpp"
#include "cmarl/envs/pressure_plate.hpp"
#include "cmarl/envs/rware.hpp"
#include "cmarl/envs/spread.hpp"

namespace oracle {

using cmarl::RngStream;
using cmarl::Vec;
using cmarl::env::Cell;

inline bool inside(int r, int c, int rows, int cols) { return r >= 0 && c >= 0 && r < rows && c < cols; }

// ---------------------------------------------------------------- LBF

inline Vec lbf_step(const cmarl::env::LbfTask& task, cmarl::env::LbfState& s, const std::vector<int>& a) {
  const int n = static_cast<int>(s.players.size());
  std::vector<std::vector<int>> busy(static_cast<std::size_t>(task.rows), std::vector<int>(static_cast<std::size_t>(task.cols), 0));
  for (auto& p : s.players) busy[p.pos.row][p.pos.col] = 1;
  for (auto& f : s.foods) {
    if (!f.collected) busy[f.pos.row][f.pos.col] = 1;
  }
  std::set<std::pair<int, int>> claimed;
  std::vector<Cell> next;
  for (int i = 0; i < n; ++i) {
    Cell p = s.players[i].pos;
    int r = p.row, c = p.col;
    if (a[i] == 1) r -= 1;
    if (a[i] == 2) r += 1;
    if (a[i] == 3) c -= 1;
    if (a[i] == 4) c += 1;
    const bool moves = (r != p.row || c != p.col) && inside(r, c, task.rows, task.cols) && busy[r][c] == 0 &&
                       claimed.count({r, c}) == 0;
    if (moves) {
      claimed.insert({r, c});
      next.push_back({r, c});
    } else {
      next.push_back(p);
    }
  }
  for (int i = 0; i < n; ++i) s.players[i].pos = next[i];

  Vec reward(static_cast<std::size_t>(n), 0.0);
  std::vector<int> done;
  for (std::size_t f = 0; f < s.foods.size(); ++f) {
    const auto& food = s.foods[f];
    if (food.collected) continue;
    int total = 0;
    std::vector<int> who;
    for (int i = 0; i < n; ++i) {
      const int dr = std::abs(s.players[i].pos.row - food.pos.row);
      const int dc = std::abs(s.players[i].pos.col - food.pos.col);
      if (a[i] == 5 && dr + dc == 1) {
        who.push_back(i);
        total += s.players[i].level;
      }
    }
    if (who.empty() || total < food.level) continue;
    for (int i : who) reward[i] += static_cast<double>(food.level * s.players[i].level) / (total * s.total_food_level);
    done.push_back(static_cast<int>(f));
  }
  for (int f : done) s.foods[f].collected = true;
  return reward;
}

inline Vec lbf_observe(const cmarl::env::LbfTask& task, const cmarl::env::LbfState& s, int agent) {
  Vec out;
  const Cell me = s.players[agent].pos;
  auto sees = [&](Cell c) {
    return task.sight == 0 || (std::abs(c.row - me.row) <= task.sight && std::abs(c.col - me.col) <= task.sight);
  };
  auto push = [&](bool show, Cell c, int level) {
    out.push_back(show ? c.row : -1);
    out.push_back(show ? c.col : -1);
    out.push_back(show ? level : 0);
  };
  for (auto& f : s.foods) push(!f.collected && sees(f.pos), f.pos, f.level);
  push(true, me, s.players[agent].level);
  for (int i = 0; i < static_cast<int>(s.players.size()); ++i) {
    if (i != agent) push(sees(s.players[i].pos), s.players[i].pos, s.players[i].level);
  }
  return out;
}

// ---------------------------------------------------------------- RWARE

inline Vec rware_observe(const cmarl::env::WarehouseLayout& L, const cmarl::env::RwareState& s, int agent) {
  Vec out(71, 0.0);
  const auto& me = s.robots[agent];
  out[0] = me.pos.col;
  out[1] = me.pos.row;
  out[2] = me.carrying >= 0;
  out[3 + me.dir] = 1;
  out[7] = L.at(me.pos) != cmarl::env::WarehouseCell::Rack;
  int k = 0;
  for (int r = me.pos.row - 1; r <= me.pos.row + 1; ++r) {
    for (int c = me.pos.col - 1; c <= me.pos.col + 1; ++c, ++k) {
      if (!inside(r, c, L.rows, L.cols)) continue;
      double* g = &out[8 + 7 * k];
      for (auto& rob : s.robots) {
        if (rob.pos == Cell{r, c}) {
          g[0] = 1;
          g[1 + rob.dir] = 1;
        }
      }
      for (std::size_t sh = 0; sh < s.shelves.size(); ++sh) {
        if (s.shelves[sh] == Cell{r, c}) {
          g[5] = 1;
          g[6] = std::count(s.requests.begin(), s.requests.end(), static_cast<int>(sh)) > 0;
        }
      }
    }
  }
  return out;
}

inline Vec rware_step(const cmarl::env::WarehouseLayout& L, cmarl::env::RwareState& s, const std::vector<int>& a,
                      RngStream& rng) {
  using cmarl::env::WarehouseCell;
  const int n = static_cast<int>(s.robots.size());
  // Facing codes: 0 up, 1 down, 2 left, 3 right. Clockwise compass order.
  const int clockwise[4] = {0, 3, 1, 2};
  auto compass_index = [&](int d) { return static_cast<int>(std::find(clockwise, clockwise + 4, d) - clockwise); };
  for (int i = 0; i < n; ++i) {
    if (a[i] == 0) s.robots[i].dir = clockwise[(compass_index(s.robots[i].dir) + 3) % 4];
    if (a[i] == 1) s.robots[i].dir = clockwise[(compass_index(s.robots[i].dir) + 1) % 4];
  }
  auto loose_shelf = [&](Cell c) {
    for (std::size_t sh = 0; sh < s.shelves.size(); ++sh) {
      bool carried = false;
      for (auto& r : s.robots) carried = carried || r.carrying == static_cast<int>(sh);
      if (!carried && s.shelves[sh] == c) return static_cast<int>(sh);
    }
    return -1;
  };
  const int dr[4] = {-1, 1, 0, 0};
  const int dc[4] = {0, 0, -1, 1};
  std::vector<int> wants(n, 0);
  std::vector<Cell> to(n);
  for (int i = 0; i < n; ++i) {
    if (a[i] != 2) continue;
    const auto& r = s.robots[i];
    Cell t{r.pos.row + dr[r.dir], r.pos.col + dc[r.dir]};
    if (!inside(t.row, t.col, L.rows, L.cols)) continue;
    if (r.carrying >= 0 && loose_shelf(t) >= 0) continue;
    wants[i] = 1;
    to[i] = t;
  }
  // Any shared target or head-on swap blocks everyone involved.
  std::vector<int> blocked(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j || !wants[i] || !wants[j]) continue;
      if (to[i] == to[j]) blocked[i] = 1;
      if (to[i] == s.robots[j].pos && to[j] == s.robots[i].pos) blocked[i] = 1;
    }
  }
  // Follow each chain: it moves iff it ends at a vacant cell or closes a cycle.
  std::vector<int> verdict(n, -1);
  for (int start = 0; start < n; ++start) {
    std::vector<int> chain;
    int cur = start;
    int result = -1;
    while (true) {
      if (verdict[cur] >= 0) {
        result = verdict[cur];
        break;
      }
      if (!wants[cur] || blocked[cur]) {
        result = 0;
        chain.push_back(cur);
        break;
      }
      if (std::find(chain.begin(), chain.end(), cur) != chain.end()) {
        result = 1;
        break;
      }
      chain.push_back(cur);
      int occupant = -1;
      for (int j = 0; j < n; ++j) {
        if (s.robots[j].pos == to[cur]) occupant = j;
      }
      if (occupant < 0) {
        result = 1;
        break;
      }
      cur = occupant;
    }
    for (int c : chain) {
      if (verdict[c] < 0) verdict[c] = (!wants[c] || blocked[c]) ? 0 : result;
    }
  }
  for (int i = 0; i < n; ++i) {
    if (verdict[i] != 1) continue;
    s.robots[i].pos = to[i];
    if (s.robots[i].carrying >= 0) s.shelves[s.robots[i].carrying] = to[i];
  }
  for (int i = 0; i < n; ++i) {
    if (a[i] != 3) continue;
    auto& r = s.robots[i];
    if (r.carrying < 0) {
      r.carrying = loose_shelf(r.pos);
    } else if (L.at(r.pos) == WarehouseCell::Rack) {
      r.carrying = -1;
    }
  }
  Vec reward(n, 0.0);
  for (int i = 0; i < n; ++i) {
    auto& r = s.robots[i];
    if (r.carrying < 0 || L.at(r.pos) != WarehouseCell::Goal) continue;
    auto slot = std::find(s.requests.begin(), s.requests.end(), r.carrying);
    if (slot == s.requests.end()) continue;
    reward[i] = 1.0;
    std::vector<int> pool;
    for (int sh = 0; sh < static_cast<int>(s.shelves.size()); ++sh) {
      if (sh != r.carrying && std::find(s.requests.begin(), s.requests.end(), sh) == s.requests.end()) pool.push_back(sh);
    }
    if (!pool.empty()) *slot = pool[rng.below(static_cast<std::uint32_t>(pool.size()))];
  }
  return reward;
}

// ---------------------------------------------------------------- Spread

struct SpreadResult {
  cmarl::env::ParticleWorld world;
  Vec rewards;
};

inline SpreadResult spread_step(cmarl::env::ParticleWorld w, const cmarl::env::SpreadPhysics& ph,
                                const std::vector<int>& a) {
  const std::size_t n = w.pos.size();
  std::vector<double> fx(n, 0.0), fy(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double ux[5] = {0, -1, 1, 0, 0};
    const double uy[5] = {0, 0, 0, -1, 1};
    fx[i] = ux[a[i]] * ph.accel;
    fy[i] = uy[a[i]] * ph.accel;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double dx = w.pos[i][0] - w.pos[j][0];
      const double dy = w.pos[i][1] - w.pos[j][1];
      const double d = std::sqrt(dx * dx + dy * dy);
      const double reach = 2 * ph.agent_radius;
      if (d >= reach || d == 0) continue;
      const double pen = std::log(1 + std::exp((reach - d) / ph.contact_margin)) * ph.contact_margin;
      fx[i] += ph.contact_force * pen * dx / d;
      fy[i] += ph.contact_force * pen * dy / d;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    w.vel[i][0] = (1 - ph.damping) * w.vel[i][0] + ph.dt * fx[i];
    w.vel[i][1] = (1 - ph.damping) * w.vel[i][1] + ph.dt * fy[i];
    w.pos[i][0] += ph.dt * w.vel[i][0];
    w.pos[i][1] += ph.dt * w.vel[i][1];
  }
  SpreadResult out{w, Vec(n, 0.0)};
  double cover = 0;
  for (auto& l : w.landmarks) {
    double m = 1e300;
    for (auto& p : w.pos) m = std::min(m, std::sqrt((p[0] - l[0]) * (p[0] - l[0]) + (p[1] - l[1]) * (p[1] - l[1])));
    cover += m;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.rewards[i] = -cover;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = std::sqrt(std::pow(w.pos[i][0] - w.pos[j][0], 2) + std::pow(w.pos[i][1] - w.pos[j][1], 2));
      if (i != j && d < 2 * ph.agent_radius) out.rewards[i] -= 1;
    }
  }
  return out;
}

// ---------------------------------------------------------------- PressurePlate

inline Vec plate_observe(const cmarl::env::PlateLayout& L, const cmarl::env::PlateWorld& w, int agent, int sight) {
  const int area = sight * sight;
  Vec out(static_cast<std::size_t>(5 * area + 2), 0.0);
  const Cell me = w.agents[agent];
  std::vector<int> pressed(L.plates.size(), 0);
  for (std::size_t k = 0; k < L.plates.size(); ++k) {
    for (auto& cell : L.plates[k]) {
      for (auto& ag : w.agents) pressed[k] |= ag == cell;
    }
  }
  for (int y = 0; y < sight; ++y) {
    for (int x = 0; x < sight; ++x) {
      const int r = me.row - sight / 2 + y;
      const int c = me.col - sight / 2 + x;
      const int at = y * sight + x;
      if (!inside(r, c, L.rows, L.cols)) {
        out[area + at] = 1;
        continue;
      }
      for (int j = 0; j < static_cast<int>(w.agents.size()); ++j) {
        if (j != agent && w.agents[j] == Cell{r, c}) out[at] = 1;
      }
      out[area + at] = L.wall[r * L.cols + c];
      for (std::size_t k = 0; k < L.plates.size(); ++k) {
        for (auto& cell : L.plates[k]) {
          if (cell == Cell{r, c}) out[2 * area + at] = 1;
        }
        for (auto& cell : L.doors[k]) {
          if (cell == Cell{r, c} && !pressed[k]) out[3 * area + at] = 1;
        }
      }
      out[4 * area + at] = L.goal == Cell{r, c};
    }
  }
  out[5 * area] = me.col;
  out[5 * area + 1] = me.row;
  return out;
}

struct PlateResult {
  cmarl::env::PlateWorld world;
  Vec rewards;
  bool done = false;
};

inline PlateResult plate_step(const cmarl::env::PlateLayout& L, cmarl::env::PlateWorld w, const std::vector<int>& a) {
  const int n = static_cast<int>(w.agents.size());
  std::set<std::pair<int, int>> shut;
  for (std::size_t k = 0; k < L.doors.size(); ++k) {
    bool held = false;
    for (auto& cell : L.plates[k]) {
      for (auto& ag : w.agents) held = held || ag == cell;
    }
    if (!held) {
      for (auto& cell : L.doors[k]) shut.insert({cell.row, cell.col});
    }
  }
  for (int i = 0; i < n; ++i) {
    int r = w.agents[i].row, c = w.agents[i].col;
    if (a[i] == 0) --r;
    if (a[i] == 1) ++r;
    if (a[i] == 2) --c;
    if (a[i] == 3) ++c;
    if (!inside(r, c, L.rows, L.cols) || L.wall[r * L.cols + c] || shut.count({r, c})) continue;
    bool taken = false;
    for (int j = 0; j < n; ++j) taken = taken || (j != i && w.agents[j] == Cell{r, c});
    if (!taken) w.agents[i] = {r, c};
  }
  // Rooms counted from the bottom; a separator row joins the room below it.
  auto room = [&](int row) {
    int k = 0;
    for (int r = L.rows - 1; r > row; --r) {
      bool sep = true;
      for (int c = 0; c < L.cols; ++c) {
        bool door = false;
        for (auto& d : L.doors) {
          for (auto& cell : d) door = door || cell == Cell{r, c};
        }
        sep = sep && (L.wall[r * L.cols + c] || door);
      }
      k += sep;
    }
    return k;
  };
  PlateResult out{w, Vec(static_cast<std::size_t>(n)), w.agents[n - 1] == L.goal};
  for (int i = 0; i < n; ++i) {
    const Cell target = i < n - 1 ? L.plates[i][0] : L.goal;
    const Cell me = w.agents[i];
    const int gap = std::abs(room(me.row) - room(target.row));
    out.rewards[i] = gap == 0 ? -static_cast<double>(std::abs(me.row - target.row) + std::abs(me.col - target.col)) / (L.rows + L.cols)
                              : -static_cast<double>(gap);
  }
  return out;
}

// ---------------------------------------------------------------- Capture Target

struct CaptureResult {
  cmarl::env::CaptureState state;
  bool captured = false;
};

inline CaptureResult capture_step(const cmarl::env::CaptureParams& p, cmarl::env::CaptureState s,
                                  const std::vector<int>& a, RngStream& rng) {
  // Actions N, S, W, E, Stay as (drow, dcol); each row lists [left, intended, right].
  const int dr[5] = {-1, 1, 0, 0, 0};
  const int dc[5] = {0, 0, -1, 1, 0};
  const int table[5][3] = {{2, 0, 3}, {3, 1, 2}, {1, 2, 0}, {0, 3, 1}, {4, 4, 4}};
  auto translate = [&](int act, double noise) {
    const double u = rng.uniform();
    const int pick = u < noise / 2 ? 0 : (u < 1.0 - noise / 2 ? 1 : 2);
    return table[act][pick];
  };
  auto go = [&](Cell c, int act) {
    return Cell{((c.row + dr[act]) % p.rows + p.rows) % p.rows, ((c.col + dc[act]) % p.cols + p.cols) % p.cols};
  };
  auto norm = [](Cell x, Cell y) { return std::hypot(double(x.row - y.row), double(x.col - y.col)); };
  for (std::size_t i = 0; i < s.agents.size(); ++i) s.agents[i] = go(s.agents[i], translate(a[i], p.agent_trans_noise));
  auto caught = [&] {
    for (auto& ag : s.agents) {
      if (!(ag == s.target)) return false;
    }
    return true;
  };
  if (caught()) return {s, true};
  int move;
  if (p.tgt_avoid_agent) {
    std::vector<double> to_target;
    for (auto& ag : s.agents) to_target.push_back(norm(ag, s.target));
    const Cell chaser = s.agents[static_cast<std::size_t>(std::min_element(to_target.begin(), to_target.end()) - to_target.begin())];
    std::vector<double> h(5);
    for (int m = 0; m < 5; ++m) h[static_cast<std::size_t>(m)] = norm(chaser, go(s.target, m));
    const double top = *std::max_element(h.begin(), h.end());
    std::vector<int> ties;
    for (int m = 0; m < 5; ++m) {
      if (h[static_cast<std::size_t>(m)] == top) ties.push_back(m);
    }
    move = ties.size() == 1 ? ties[0] : ties[rng.below(static_cast<std::uint32_t>(ties.size()))];
  } else {
    move = static_cast<int>(rng.below(5));
  }
  s.target = go(s.target, translate(move, p.tgt_trans_noise));
  return {s, caught()};
}

// ---------------------------------------------------------------- Box Pushing

struct BoxResult {
  cmarl::env::BoxWorld world;
  std::array<double, 2> rewards{};
  bool done = false;
};

/// Works on an explicit character grid: 's' small box, 'L' large box cell.
inline BoxResult box_step(const cmarl::env::BoxGeometry& g, cmarl::env::BoxWorld w, const std::vector<int>& a) {
  BoxResult out;
  out.rewards = {-0.1, -0.1};
  const int dr[4] = {-1, 0, 1, 0};  // N E S W
  const int dc[4] = {0, 1, 0, -1};
  for (int i = 0; i < 2; ++i) {
    if (a[i] == 1) w.agents[i].dir = (w.agents[i].dir + 3) % 4;
    if (a[i] == 2) w.agents[i].dir = (w.agents[i].dir + 1) % 4;
  }
  auto grid = [&] {
    std::vector<std::string> rows(static_cast<std::size_t>(g.rows), std::string(static_cast<std::size_t>(g.cols), '.'));
    for (auto& b : w.small) rows[b.row][b.col] = 's';
    rows[w.large.row][w.large.col] = 'L';
    rows[w.large.row][w.large.col + 1] = 'L';
    rows[w.agents[0].pos.row][w.agents[0].pos.col] = '0';
    rows[w.agents[1].pos.row][w.agents[1].pos.col] = '1';
    return rows;
  };
  // Joint large-box push.
  if (a[0] == 0 && a[1] == 0 && w.agents[0].dir == w.agents[1].dir && w.agents[0].dir % 2 == 0) {
    const int d = w.agents[0].dir;
    std::set<std::pair<int, int>> feet = {{w.agents[0].pos.row, w.agents[0].pos.col}, {w.agents[1].pos.row, w.agents[1].pos.col}};
    std::set<std::pair<int, int>> behind = {{w.large.row - dr[d], w.large.col}, {w.large.row - dr[d], w.large.col + 1}};
    if (feet == behind) {
      const int nr = w.large.row + dr[d];
      auto G = grid();
      if (inside(nr, w.large.col, g.rows, g.cols) && G[nr][w.large.col] != 's' && G[nr][w.large.col + 1] != 's') {
        w.large.row = nr;
        for (auto& ag : w.agents) ag.pos.row += dr[d];
        if (nr == g.goal_row) {
          out.rewards[0] += 100;
          out.rewards[1] += 100;
          out.done = true;
        }
      }
      out.world = w;
      return out;
    }
  }
  for (int i = 0; i < 2; ++i) {
    if (a[i] != 0) continue;
    auto G = grid();
    auto& me = w.agents[i];
    const int r = me.pos.row + dr[me.dir], c = me.pos.col + dc[me.dir];
    if (!inside(r, c, g.rows, g.cols) || G[r][c] == 'L') {
      out.rewards[i] -= 5;
    } else if (G[r][c] == '.') {
      me.pos = {r, c};
    } else if (G[r][c] == 's') {
      const int r2 = r + dr[me.dir], c2 = c + dc[me.dir];
      if (inside(r2, c2, g.rows, g.cols) && G[r2][c2] == '.') {
        for (auto& b : w.small) {
          if (b == Cell{r, c}) b = {r2, c2};
        }
        me.pos = {r, c};
        if (r2 == g.goal_row) {
          out.rewards[i] += 10;
          out.done = true;
        }
      }
    }
  }
  out.world = w;
  return out;
}

inline Vec box_observe(const cmarl::env::BoxGeometry& g, const cmarl::env::BoxWorld& w, int agent) {
  const int dr[4] = {-1, 0, 1, 0};
  const int dc[4] = {0, 1, 0, -1};
  const auto& me = w.agents[agent];
  const Cell c{me.pos.row + dr[me.dir], me.pos.col + dc[me.dir]};
  Vec out(5, 0.0);
  if (!inside(c.row, c.col, g.rows, g.cols)) {
    out[3] = 1;
  } else if (c == w.small[0] || c == w.small[1]) {
    out[0] = 1;
  } else if (c == w.large || c == Cell{w.large.row, w.large.col + 1}) {
    out[1] = 1;
  } else if (c == w.agents[1 - agent].pos) {
    out[4] = 1;
  } else {
    out[2] = 1;
  }
  return out;
}

// ---------------------------------------------------------------- Overcooked

/// Featurizer written from the feature list: one function per feature group.
inline Vec overcooked_features(const cmarl::env::KitchenLayout& L, const cmarl::env::KitchenState& s, int who) {
  using cmarl::env::ItemKind;
  const auto& me = s.chefs[who];
  const int x = me.pos.col, y = me.pos.row;
  Vec f;
  for (int d = 0; d < 4; ++d) f.push_back(me.facing == d);
  for (int k = 0; k < 4; ++k) f.push_back(me.held && static_cast<int>(me.held->kind) == k);

  auto scan = [&](auto pick) {
    // Row-major scan keeps the first of several equally distant cells.
    int best = 1 << 30, bx = 0, by = 0;
    bool any = false;
    for (int r = 0; r < L.rows; ++r) {
      for (int c = 0; c < L.cols; ++c) {
        if (!pick(r, c)) continue;
        const int d = std::abs(r - y) + std::abs(c - x);
        if (d < best) {
          best = d;
          bx = c - x;
          by = r - y;
          any = true;
        }
      }
    }
    return std::array<double, 3>{static_cast<double>(bx), static_cast<double>(by), any ? 1.0 : 0.0};
  };
  auto on_counter = [&](int r, int c, ItemKind k) {
    auto it = s.counters.find(r * L.cols + c);
    return it != s.counters.end() && it->second.kind == k;
  };
  auto group = [&](ItemKind k, char source) {
    if (me.held && me.held->kind == k) {
      f.push_back(0);
      f.push_back(0);
      return;
    }
    auto res = scan([&](int r, int c) { return L.terrain[r * L.cols + c] == source || on_counter(r, c, k); });
    f.push_back(res[0]);
    f.push_back(res[1]);
  };
  group(ItemKind::Onion, 'O');
  group(ItemKind::Tomato, 'T');
  group(ItemKind::Dish, 'D');
  group(ItemKind::Soup, '#');
  if (me.held && me.held->kind == ItemKind::Soup) {
    f.push_back(me.held->onions);
    f.push_back(me.held->tomatoes);
  } else {
    auto res = scan([&](int r, int c) { return on_counter(r, c, ItemKind::Soup); });
    if (res[2] > 0) {
      const auto& item = s.counters.at((y + static_cast<int>(res[1])) * L.cols + x + static_cast<int>(res[0]));
      f.push_back(item.onions);
      f.push_back(item.tomatoes);
    } else {
      f.push_back(0);
      f.push_back(0);
    }
  }
  auto serve = scan([&](int r, int c) { return L.terrain[r * L.cols + c] == 'S'; });
  f.push_back(serve[0]);
  f.push_back(serve[1]);
  f.push_back(0);  // empty-counter goals: none designated
  f.push_back(0);

  std::vector<std::pair<int, std::size_t>> order;
  for (std::size_t k = 0; k < s.pots.size(); ++k) {
    order.push_back({std::abs(s.pots[k].pos.row - y) + std::abs(s.pots[k].pos.col - x), k});
  }
  std::sort(order.begin(), order.end());
  for (int j = 0; j < 2; ++j) {
    if (j >= static_cast<int>(order.size())) {
      for (int z = 0; z < 10; ++z) f.push_back(0);
      continue;
    }
    const auto& pot = s.pots[order[j].second];
    const int count = pot.onions + pot.tomatoes;
    const bool ready = pot.cooking && pot.remaining == 0;
    f.insert(f.end(), {1.0, count == 0 ? 1.0 : 0.0, count == 3 ? 1.0 : 0.0, pot.cooking && !ready ? 1.0 : 0.0,
                       ready ? 1.0 : 0.0, static_cast<double>(pot.onions), static_cast<double>(pot.tomatoes),
                       pot.cooking ? static_cast<double>(pot.remaining) : 0.0,
                       static_cast<double>(pot.pos.col - x), static_cast<double>(pot.pos.row - y)});
  }
  const int wr[4] = {-1, 1, 0, 0};
  const int wc[4] = {0, 0, 1, -1};
  for (int d = 0; d < 4; ++d) {
    const int r = y + wr[d], c = x + wc[d];
    f.push_back(!inside(r, c, L.rows, L.cols) || L.terrain[r * L.cols + c] != ' ');
  }
  return f;
}

inline Vec overcooked_observe(const cmarl::env::KitchenLayout& L, const cmarl::env::KitchenState& s, int who) {
  Vec own = overcooked_features(L, s, who);
  Vec other = overcooked_features(L, s, 1 - who);
  own.insert(own.end(), other.begin(), other.end());
  const auto& me = s.chefs[who].pos;
  const auto& mate = s.chefs[1 - who].pos;
  own.insert(own.end(), {static_cast<double>(mate.col - me.col), static_cast<double>(mate.row - me.row),
                         static_cast<double>(me.col), static_cast<double>(me.row)});
  return own;
}

struct KitchenResult {
  cmarl::env::KitchenState state;
  std::array<double, 2> rewards{};
};

inline KitchenResult overcooked_step(const cmarl::env::KitchenLayout& L, const cmarl::env::KitchenRules& rules,
                                     cmarl::env::KitchenState s, const std::vector<int>& a) {
  using cmarl::env::Item;
  using cmarl::env::ItemKind;
  KitchenResult out;
  const int fr[4] = {-1, 1, 0, 0};
  const int fc[4] = {0, 0, 1, -1};
  for (int i = 0; i < 2; ++i) {
    if (a[i] != 5) continue;
    auto& me = s.chefs[i];
    const int r = me.pos.row + fr[me.facing], c = me.pos.col + fc[me.facing];
    const char t = inside(r, c, L.rows, L.cols) ? L.terrain[r * L.cols + c] : 'X';
    const int key = r * L.cols + c;
    if (t == 'X') {
      if (me.held && !s.counters.count(key)) {
        s.counters[key] = *me.held;
        me.held.reset();
      } else if (!me.held && s.counters.count(key)) {
        me.held = s.counters[key];
        s.counters.erase(key);
      }
    } else if ((t == 'O' || t == 'T' || t == 'D') && !me.held) {
      me.held = Item{t == 'O' ? ItemKind::Onion : t == 'T' ? ItemKind::Tomato : ItemKind::Dish};
      if (t == 'D' && rules.shaped) out.rewards[i] += rules.dish_pickup_bonus;
    } else if (t == 'P' && me.held) {
      for (auto& pot : s.pots) {
        if (!(pot.pos == Cell{r, c})) continue;
        const bool ingredient = me.held->kind == ItemKind::Onion || me.held->kind == ItemKind::Tomato;
        if (ingredient && !pot.cooking && pot.onions + pot.tomatoes < rules.pot_capacity) {
          if (me.held->kind == ItemKind::Onion) {
            ++pot.onions;
          } else {
            ++pot.tomatoes;
          }
          me.held.reset();
          if (rules.shaped) out.rewards[i] += rules.onion_in_pot_bonus;
          if (pot.onions + pot.tomatoes == rules.pot_capacity) {
            pot.cooking = true;
            pot.remaining = rules.cook_time;
          }
        } else if (me.held->kind == ItemKind::Dish && pot.cooking && pot.remaining == 0) {
          me.held = Item{ItemKind::Soup, pot.onions, pot.tomatoes};
          pot.onions = pot.tomatoes = 0;
          pot.cooking = false;
          if (rules.shaped) out.rewards[i] += rules.soup_pickup_bonus;
        }
      }
    } else if (t == 'S' && me.held && me.held->kind == ItemKind::Soup) {
      if (me.held->onions == 3 && me.held->tomatoes == 0) {
        out.rewards[0] += 10;
        out.rewards[1] += 10;
      }
      me.held.reset();
    }
  }
  std::array<Cell, 2> dest;
  for (int i = 0; i < 2; ++i) {
    dest[i] = s.chefs[i].pos;
    if (a[i] < 4) {
      s.chefs[i].facing = a[i];
      const int r = dest[i].row + fr[a[i]], c = dest[i].col + fc[a[i]];
      if (inside(r, c, L.rows, L.cols) && L.terrain[r * L.cols + c] == ' ') dest[i] = {r, c};
    }
  }
  const bool clash = dest[0] == dest[1] || (dest[0] == s.chefs[1].pos && dest[1] == s.chefs[0].pos);
  if (!clash) {
    s.chefs[0].pos = dest[0];
    s.chefs[1].pos = dest[1];
  }
  for (auto& pot : s.pots) {
    if (pot.cooking && pot.remaining > 0) pot.remaining -= 1;
  }
  out.state = s;
  return out;
}

}  // namespace oracle

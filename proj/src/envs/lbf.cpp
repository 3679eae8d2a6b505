#include "cmarl/envs/lbf.hpp"

#include <algorithm>
#include <regex>

#include "cmarl/core/errors.hpp"

namespace cmarl::env {

LbfTask parse_lbf_key(std::string_view raw) {
  std::string key(raw);
  if (key.starts_with("lbforaging:")) key = key.substr(11);
  static const std::regex grammar(R"(^Foraging-(?:(\d+)s-)?(\d+)x(\d+)-(\d+)p-(\d+)f(-coop)?-v2$)");
  std::smatch m;
  if (!std::regex_match(key, m, grammar)) {
    raise(ErrorCode::UnknownKey, "unrecognized LBF key '" + std::string(raw) + "'");
  }
  LbfTask task;
  task.sight = m[1].matched ? std::stoi(m[1].str()) : 0;
  task.rows = std::stoi(m[2].str());
  task.cols = std::stoi(m[3].str());
  task.n_players = std::stoi(m[4].str());
  task.n_foods = std::stoi(m[5].str());
  task.coop = m[6].matched;
  if (task.rows < 1 || task.cols < 1 || task.n_players < 1 || task.n_foods < 1) {
    raise(ErrorCode::UnknownKey, "degenerate LBF key '" + std::string(raw) + "'");
  }
  return task;
}

std::string format_lbf_key(const LbfTask& task) {
  std::string key = "Foraging-";
  if (task.sight > 0) key += std::to_string(task.sight) + "s-";
  key += std::to_string(task.rows) + "x" + std::to_string(task.cols) + "-";
  key += std::to_string(task.n_players) + "p-" + std::to_string(task.n_foods) + "f";
  if (task.coop) key += "-coop";
  return key + "-v2";
}

namespace {

void put_triplet(std::span<double> out, std::size_t at, Cell pos, int level) {
  out[at] = pos.row;
  out[at + 1] = pos.col;
  out[at + 2] = level;
}

void put_sentinel(std::span<double> out, std::size_t at) {
  out[at] = -1.0;
  out[at + 1] = -1.0;
  out[at + 2] = 0.0;
}

Cell move_delta(int action) {
  switch (action) {
    case kLbfNorth: return {-1, 0};
    case kLbfSouth: return {1, 0};
    case kLbfWest: return {0, -1};
    case kLbfEast: return {0, 1};
    default: return {0, 0};
  }
}

}  // namespace

void lbf_observe(const LbfTask& task, const LbfState& state, int agent, std::span<double> out) {
  const Cell self = state.players[static_cast<std::size_t>(agent)].pos;
  auto visible = [&](Cell c) { return task.sight == 0 || chebyshev(self, c) <= task.sight; };
  std::size_t at = 0;
  for (const LbfFood& f : state.foods) {
    if (!f.collected && visible(f.pos)) {
      put_triplet(out, at, f.pos, f.level);
    } else {
      put_sentinel(out, at);
    }
    at += 3;
  }
  const LbfPlayer& me = state.players[static_cast<std::size_t>(agent)];
  put_triplet(out, at, me.pos, me.level);
  at += 3;
  for (std::size_t i = 0; i < state.players.size(); ++i) {
    if (static_cast<int>(i) == agent) continue;
    const LbfPlayer& p = state.players[i];
    if (visible(p.pos)) {
      put_triplet(out, at, p.pos, p.level);
    } else {
      put_sentinel(out, at);
    }
    at += 3;
  }
}

Vec lbf_observe(const LbfTask& task, const LbfState& state, int agent) {
  Vec out(3 * (state.foods.size() + state.players.size()));
  lbf_observe(task, state, agent, out);
  return out;
}

Vec lbf_global_state(const LbfTask&, const LbfState& state) {
  Vec out(3 * (state.foods.size() + state.players.size()));
  std::size_t at = 0;
  for (const LbfFood& f : state.foods) {
    if (f.collected) {
      put_sentinel(out, at);
    } else {
      put_triplet(out, at, f.pos, f.level);
    }
    at += 3;
  }
  for (const LbfPlayer& p : state.players) {
    put_triplet(out, at, p.pos, p.level);
    at += 3;
  }
  return out;
}

Vec lbf_reward(const LbfState& state, const LbfFood& food, std::span<const int> participants) {
  Vec rewards(state.players.size(), 0.0);
  double level_sum = 0.0;
  for (int p : participants) level_sum += state.players[static_cast<std::size_t>(p)].level;
  const double denom = level_sum * state.total_food_level;
  for (int p : participants) {
    const double lvl = state.players[static_cast<std::size_t>(p)].level;
    rewards[static_cast<std::size_t>(p)] += food.level * lvl / denom;
  }
  return rewards;
}

Vec lbf_step(const LbfTask& task, LbfState& state, std::span<const int> actions) {
  const std::size_t n = state.players.size();
  Vec rewards(n, 0.0);

  auto occupied = [&](Cell c) {
    for (const LbfPlayer& p : state.players) {
      if (p.pos == c) return true;
    }
    for (const LbfFood& f : state.foods) {
      if (!f.collected && f.pos == c) return true;
    }
    return false;
  };

  // Movement: a target must be in bounds and free at the start of the tick;
  // contested targets go to the lowest agent index.
  std::vector<Cell> target(n);
  std::vector<bool> wants(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const int a = actions[i];
    if (a < kLbfNorth || a > kLbfEast) continue;
    const Cell t = state.players[i].pos + move_delta(a);
    if (!in_bounds(t, task.rows, task.cols) || occupied(t)) continue;
    target[i] = t;
    wants[i] = true;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!wants[i]) continue;
    for (std::size_t j = 0; j < i; ++j) {
      if (wants[j] && target[j] == target[i]) {
        wants[i] = false;
        break;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (wants[i]) state.players[i].pos = target[i];
  }

  // Pick-ups resolve simultaneously against post-move positions.
  std::vector<int> participants;
  std::vector<std::size_t> collected_now;
  for (std::size_t f = 0; f < state.foods.size(); ++f) {
    const LbfFood& food = state.foods[f];
    if (food.collected) continue;
    participants.clear();
    int level_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (actions[i] == kLbfPickup && manhattan(state.players[i].pos, food.pos) == 1) {
        participants.push_back(static_cast<int>(i));
        level_sum += state.players[i].level;
      }
    }
    if (!participants.empty() && level_sum >= food.level) {
      const Vec share = lbf_reward(state, food, participants);
      for (std::size_t i = 0; i < n; ++i) rewards[i] += share[i];
      collected_now.push_back(f);
    }
  }
  for (std::size_t f : collected_now) state.foods[f].collected = true;
  return rewards;
}

bool lbf_all_collected(const LbfState& state) {
  return std::all_of(state.foods.begin(), state.foods.end(),
                     [](const LbfFood& f) { return f.collected; });
}

LbfState lbf_spawn(const LbfTask& task, int max_player_level, RngStream& rng) {
  constexpr int kAttempts = 1000;
  const int cells = task.rows * task.cols;
  if (task.n_players + task.n_foods > cells) {
    raise(ErrorCode::UnsatisfiableSpawn, "grid too small for " +
                                             std::to_string(task.n_players + task.n_foods) +
                                             " entities");
  }
  LbfState state;
  auto random_cell = [&]() {
    return Cell{rng.uniform_int(0, task.rows - 1), rng.uniform_int(0, task.cols - 1)};
  };
  auto taken = [&](Cell c) {
    for (const LbfFood& f : state.foods) {
      if (f.pos == c) return true;
    }
    for (const LbfPlayer& p : state.players) {
      if (p.pos == c) return true;
    }
    return false;
  };

  int max_level = 0;
  int level_sum = 0;
  for (int i = 0; i < task.n_players; ++i) {
    LbfPlayer p;
    p.level = rng.uniform_int(1, max_player_level);
    max_level = std::max(max_level, p.level);
    level_sum += p.level;
    state.players.push_back(p);
  }

  // Foods keep at least one empty cell between each other.
  for (int k = 0; k < task.n_foods; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < kAttempts && !placed; ++attempt) {
      const Cell c = random_cell();
      bool crowded = false;
      for (const LbfFood& f : state.foods) crowded = crowded || chebyshev(f.pos, c) <= 1;
      if (crowded) continue;
      LbfFood food;
      food.pos = c;
      if (task.coop) {
        food.level = max_level < level_sum ? rng.uniform_int(max_level + 1, level_sum) : level_sum;
      } else {
        food.level = rng.uniform_int(1, max_level);
      }
      state.foods.push_back(food);
      placed = true;
    }
    if (!placed) raise(ErrorCode::UnsatisfiableSpawn, "could not place food items");
  }

  for (LbfPlayer& p : state.players) p.pos = Cell{-1, -1};
  for (std::size_t i = 0; i < state.players.size(); ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < kAttempts && !placed; ++attempt) {
      const Cell c = random_cell();
      if (taken(c)) continue;
      state.players[i].pos = c;
      placed = true;
    }
    if (!placed) raise(ErrorCode::UnsatisfiableSpawn, "could not place players");
  }

  for (const LbfFood& f : state.foods) state.total_food_level += f.level;
  return state;
}

LbfEnv::LbfEnv(const EnvConfig& config) : Environment(config, 50), task_(parse_lbf_key(config.key)) {
  ExtrasReader extras(config.extras);
  task_.sight = static_cast<int>(extras.get_int("sight", task_.sight));
  max_player_level_ = static_cast<int>(extras.get_int("max_player_level", 2));
  extras.finish();
  if (task_.sight < 0) raise(ErrorCode::BadExtra, "sight must be >= 0");
  if (max_player_level_ < 1) raise(ErrorCode::BadExtra, "max_player_level must be >= 1");
  const int dim = 3 * (task_.n_foods + task_.n_players);
  set_spec(task_.n_players, kLbfActions, dim, dim);
}

void LbfEnv::on_reset(RngStream& rng) { state_ = lbf_spawn(task_, max_player_level_, rng); }

Environment::Transition LbfEnv::on_step(std::span<const int> actions, RngStream&) {
  Transition t;
  t.agent_rewards = lbf_step(task_, state_, actions);
  t.terminated = lbf_all_collected(state_);
  int collected = 0;
  for (const LbfFood& f : state_.foods) collected += f.collected ? 1 : 0;
  t.extras["foods_collected"] = collected;
  return t;
}

void LbfEnv::observe(std::vector<Vec>& obs, Vec& state, RngStream&) {
  for (int i = 0; i < task_.n_players; ++i) {
    lbf_observe(task_, state_, i, obs[static_cast<std::size_t>(i)]);
  }
  state = lbf_global_state(task_, state_);
}

std::string LbfEnv::render() const {
  std::string grid(static_cast<std::size_t>(task_.rows * (task_.cols + 1)), '.');
  for (int r = 0; r < task_.rows; ++r) grid[static_cast<std::size_t>(r * (task_.cols + 1) + task_.cols)] = '\n';
  auto at = [&](Cell c) -> char& {
    return grid[static_cast<std::size_t>(c.row * (task_.cols + 1) + c.col)];
  };
  for (const LbfFood& f : state_.foods) {
    if (!f.collected) at(f.pos) = f.level < 10 ? static_cast<char>('0' + f.level) : '*';
  }
  for (std::size_t i = 0; i < state_.players.size(); ++i) {
    at(state_.players[i].pos) = static_cast<char>('A' + static_cast<int>(i % 26));
  }
  return grid;
}

}  // namespace cmarl::env

#include "cmarl/envs/overcooked.hpp"

#include <algorithm>
#include <climits>
#include <fstream>
#include <sstream>

#include "cmarl/core/errors.hpp"

namespace cmarl::env {

KitchenLayout KitchenLayout::parse(std::string_view ascii) {
  std::vector<std::string> lines;
  std::istringstream in{std::string(ascii)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) raise(ErrorCode::BadConfig, "empty kitchen layout");
  KitchenLayout k;
  k.rows = static_cast<int>(lines.size());
  k.cols = static_cast<int>(lines[0].size());
  bool seen[2] = {false, false};
  for (int r = 0; r < k.rows; ++r) {
    const std::string& row = lines[static_cast<std::size_t>(r)];
    if (static_cast<int>(row.size()) != k.cols) raise(ErrorCode::BadConfig, "ragged kitchen layout");
    for (int c = 0; c < k.cols; ++c) {
      char ch = row[static_cast<std::size_t>(c)];
      if (ch == '1' || ch == '2') {
        const int id = ch - '1';
        k.start[static_cast<std::size_t>(id)] = {r, c};
        seen[id] = true;
        ch = ' ';
      } else if (std::string_view("XOTDPS ").find(ch) == std::string_view::npos) {
        raise(ErrorCode::BadConfig, std::string("bad kitchen symbol '") + ch + "'");
      }
      k.terrain += ch;
    }
  }
  if (!seen[0] || !seen[1]) raise(ErrorCode::BadConfig, "kitchen layout needs start cells '1' and '2'");
  return k;
}

std::string KitchenLayout::to_ascii() const {
  std::string out;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      char ch = at({r, c});
      if (start[0] == Cell{r, c}) ch = '1';
      if (start[1] == Cell{r, c}) ch = '2';
      out += ch;
    }
    out += '\n';
  }
  return out;
}

std::vector<Cell> KitchenLayout::cells_of(char kind) const {
  std::vector<Cell> out;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (at({r, c}) == kind) out.push_back({r, c});
    }
  }
  return out;
}

KitchenLayout cramped_room_layout() {
  return KitchenLayout::parse(
      "XXPXX\n"
      "O  2O\n"
      "X1  X\n"
      "XDXSX\n");
}

Cell facing_offset(int facing) {
  switch (facing) {
    case kNorth: return {-1, 0};
    case kSouth: return {1, 0};
    case kEast: return {0, 1};
    default: return {0, -1};
  }
}

namespace {

struct Nearest {
  bool found = false;
  Cell cell;
};

/// Manhattan-closest candidate; ties go to the earliest in row-major order.
Nearest nearest(Cell from, std::vector<Cell> candidates) {
  std::sort(candidates.begin(), candidates.end(),
            [](Cell a, Cell b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  Nearest best;
  int best_d = INT_MAX;
  for (Cell c : candidates) {
    const int d = manhattan(from, c);
    if (d < best_d) {
      best_d = d;
      best = {true, c};
    }
  }
  return best;
}

void put_delta(Cell from, const Nearest& n, double* out) {
  out[0] = n.found ? n.cell.col - from.col : 0.0;
  out[1] = n.found ? n.cell.row - from.row : 0.0;
}

std::vector<Cell> counter_items(const KitchenLayout& layout, const KitchenState& s, ItemKind kind) {
  std::vector<Cell> out;
  for (const auto& [index, item] : s.counters) {
    if (item.kind == kind) out.push_back({index / layout.cols, index % layout.cols});
  }
  return out;
}

std::vector<Cell> with(std::vector<Cell> a, const std::vector<Cell>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

bool walkable(const KitchenLayout& layout, Cell c) { return layout.at(c) == ' '; }

}  // namespace

void chef_features(const KitchenLayout& layout, const KitchenState& state, int chef, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const Chef& self = state.chefs[static_cast<std::size_t>(chef)];
  const Cell p = self.pos;
  double* f = out.data();

  f[self.facing] = 1.0;
  if (self.held) f[4 + static_cast<int>(self.held->kind)] = 1.0;

  auto closest = [&](ItemKind kind, std::vector<Cell> sources, double* slot) {
    if (self.held && self.held->kind == kind) return;  // held items read (0, 0)
    put_delta(p, nearest(p, with(std::move(sources), counter_items(layout, state, kind))), slot);
  };
  closest(ItemKind::Onion, layout.cells_of('O'), f + 8);
  closest(ItemKind::Tomato, layout.cells_of('T'), f + 10);
  closest(ItemKind::Dish, layout.cells_of('D'), f + 12);
  closest(ItemKind::Soup, {}, f + 14);

  if (self.held && self.held->kind == ItemKind::Soup) {
    f[16] = self.held->onions;
    f[17] = self.held->tomatoes;
  } else if (const Nearest soup = nearest(p, counter_items(layout, state, ItemKind::Soup)); soup.found) {
    const Item& item = state.counters.at(soup.cell.row * layout.cols + soup.cell.col);
    f[16] = item.onions;
    f[17] = item.tomatoes;
  }

  put_delta(p, nearest(p, layout.cells_of('S')), f + 18);
  // f[20..21]: closest empty counter among designated counter goals; the
  // supported layouts designate none, so the pair stays (0, 0).

  std::vector<const Pot*> pots;
  for (const Pot& pot : state.pots) pots.push_back(&pot);
  std::stable_sort(pots.begin(), pots.end(),
                   [&](const Pot* a, const Pot* b) { return manhattan(p, a->pos) < manhattan(p, b->pos); });
  for (std::size_t j = 0; j < 2 && j < pots.size(); ++j) {
    const Pot& pot = *pots[j];
    double* b = f + 22 + 10 * j;
    b[0] = 1.0;
    b[1] = pot.ingredients() == 0 ? 1.0 : 0.0;
    b[2] = pot.ingredients() == 3 ? 1.0 : 0.0;
    b[3] = pot.cooking && !pot.ready() ? 1.0 : 0.0;
    b[4] = pot.ready() ? 1.0 : 0.0;
    b[5] = pot.onions;
    b[6] = pot.tomatoes;
    b[7] = pot.cooking ? pot.remaining : 0.0;
    b[8] = pot.pos.col - p.col;
    b[9] = pot.pos.row - p.row;
  }

  for (int d = 0; d < 4; ++d) f[42 + d] = walkable(layout, p + facing_offset(d)) ? 0.0 : 1.0;
}

void overcooked_featurize(const KitchenLayout& layout, const KitchenState& state, int chef,
                          std::span<double> out) {
  const int other = 1 - chef;
  chef_features(layout, state, chef, out.subspan(0, kChefFeatures));
  chef_features(layout, state, other, out.subspan(kChefFeatures, kChefFeatures));
  const Cell self = state.chefs[static_cast<std::size_t>(chef)].pos;
  const Cell mate = state.chefs[static_cast<std::size_t>(other)].pos;
  out[2 * kChefFeatures] = mate.col - self.col;
  out[2 * kChefFeatures + 1] = mate.row - self.row;
  out[2 * kChefFeatures + 2] = self.col;
  out[2 * kChefFeatures + 3] = self.row;
}

Vec overcooked_featurize(const KitchenLayout& layout, const KitchenState& state, int chef) {
  Vec out(kOvercookedObsDim);
  overcooked_featurize(layout, state, chef, out);
  return out;
}

namespace {

void interact(const KitchenLayout& layout, const KitchenRules& rules, KitchenState& s, int i,
              KitchenOutcome& out) {
  Chef& chef = s.chefs[static_cast<std::size_t>(i)];
  const Cell target = chef.pos + facing_offset(chef.facing);
  auto& reward = out.rewards[static_cast<std::size_t>(i)];
  switch (layout.at(target)) {
    case 'X': {
      const int index = target.row * layout.cols + target.col;
      auto it = s.counters.find(index);
      if (chef.held && it == s.counters.end()) {
        s.counters.emplace(index, *chef.held);
        chef.held.reset();
      } else if (!chef.held && it != s.counters.end()) {
        chef.held = it->second;
        s.counters.erase(it);
      }
      break;
    }
    case 'O':
      if (!chef.held) chef.held = Item{ItemKind::Onion};
      break;
    case 'T':
      if (!chef.held) chef.held = Item{ItemKind::Tomato};
      break;
    case 'D':
      if (!chef.held) {
        chef.held = Item{ItemKind::Dish};
        if (rules.shaped) reward += rules.dish_pickup_bonus;
      }
      break;
    case 'P': {
      auto pot = std::find_if(s.pots.begin(), s.pots.end(), [&](const Pot& p) { return p.pos == target; });
      if (pot == s.pots.end() || !chef.held) break;
      const ItemKind kind = chef.held->kind;
      if ((kind == ItemKind::Onion || kind == ItemKind::Tomato) && !pot->cooking &&
          pot->ingredients() < rules.pot_capacity) {
        (kind == ItemKind::Onion ? pot->onions : pot->tomatoes) += 1;
        if (kind == ItemKind::Onion) ++out.onions_added;
        chef.held.reset();
        if (rules.shaped) reward += rules.onion_in_pot_bonus;
        if (pot->ingredients() == rules.pot_capacity) {
          pot->cooking = true;
          pot->remaining = rules.cook_time;
        }
      } else if (kind == ItemKind::Dish && pot->ready()) {
        chef.held = Item{ItemKind::Soup, pot->onions, pot->tomatoes};
        *pot = Pot{pot->pos};
        if (rules.shaped) reward += rules.soup_pickup_bonus;
      }
      break;
    }
    case 'S':
      if (chef.held && chef.held->kind == ItemKind::Soup) {
        const bool valid = chef.held->onions == rules.pot_capacity && chef.held->tomatoes == 0;
        chef.held.reset();
        ++out.deliveries;
        if (valid) {
          // Team event: the value is split evenly between the two chefs.
          out.rewards[0] += rules.soup_value / 2.0;
          out.rewards[1] += rules.soup_value / 2.0;
        }
      }
      break;
    default:
      break;
  }
}

}  // namespace

KitchenOutcome overcooked_step(const KitchenLayout& layout, const KitchenRules& rules, KitchenState& state,
                               std::span<const int> actions) {
  KitchenOutcome out;
  for (int i = 0; i < 2; ++i) {
    if (actions[static_cast<std::size_t>(i)] == kCookInteract) interact(layout, rules, state, i, out);
  }

  std::array<Cell, 2> next{};
  for (std::size_t i = 0; i < 2; ++i) {
    Chef& chef = state.chefs[i];
    next[i] = chef.pos;
    const int a = actions[i];
    if (a <= kCookWest) {
      chef.facing = a;
      const Cell to = chef.pos + facing_offset(a);
      if (walkable(layout, to)) next[i] = to;
    }
  }
  const bool collide = next[0] == next[1];
  const bool swap = next[0] == state.chefs[1].pos && next[1] == state.chefs[0].pos;
  if (!collide && !swap) {
    state.chefs[0].pos = next[0];
    state.chefs[1].pos = next[1];
  }

  for (Pot& pot : state.pots) {
    if (pot.cooking && pot.remaining > 0) --pot.remaining;
  }
  return out;
}

KitchenState overcooked_initial_state(const KitchenLayout& layout) {
  KitchenState s;
  s.chefs[0] = {layout.start[0], kNorth, std::nullopt};
  s.chefs[1] = {layout.start[1], kNorth, std::nullopt};
  for (Cell c : layout.cells_of('P')) s.pots.push_back(Pot{c});
  return s;
}

OvercookedEnv::OvercookedEnv(const EnvConfig& config) : Environment(config, 500) {
  ExtrasReader extras(config.extras);
  const std::string reward_type = extras.get_string("reward_type", "sparse");
  const std::string path = extras.get_string("layout", "");
  rules_.cook_time = static_cast<int>(extras.get_int("cook_time", 20));
  extras.finish();
  if (reward_type != "sparse" && reward_type != "shaped") {
    raise(ErrorCode::BadExtra, "reward_type must be 'sparse' or 'shaped'");
  }
  if (rules_.cook_time < 0) raise(ErrorCode::BadExtra, "cook_time must be non-negative");
  rules_.shaped = reward_type == "shaped";
  if (config.key != "cramped_room") {
    raise(ErrorCode::UnknownKey, "unsupported overcooked layout '" + config.key + "'");
  }
  if (path.empty()) {
    layout_ = cramped_room_layout();
  } else {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::BadExtra, "cannot open layout file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    layout_ = KitchenLayout::parse(buf.str());
  }
  set_spec(2, kCookActions, kOvercookedObsDim, 2 * kOvercookedObsDim);
}

void OvercookedEnv::on_reset(RngStream&) { state_ = overcooked_initial_state(layout_); }

Environment::Transition OvercookedEnv::on_step(std::span<const int> actions, RngStream&) {
  const KitchenOutcome o = overcooked_step(layout_, rules_, state_, actions);
  Transition t;
  t.agent_rewards.assign(o.rewards.begin(), o.rewards.end());
  t.extras["deliveries"] = o.deliveries;
  t.extras["onions_added"] = o.onions_added;
  return t;
}

void OvercookedEnv::observe(std::vector<Vec>& obs, Vec& state, RngStream&) {
  for (int i = 0; i < 2; ++i) {
    auto& o = obs[static_cast<std::size_t>(i)];
    overcooked_featurize(layout_, state_, i, o);
    std::copy(o.begin(), o.end(), state.begin() + i * kOvercookedObsDim);
  }
}

std::string OvercookedEnv::render() const {
  static constexpr char kFacing[] = "^v><";
  std::string out = layout_.to_ascii();
  for (char& ch : out) {
    if (ch == '1' || ch == '2') ch = ' ';
  }
  for (const Chef& c : state_.chefs) {
    out[static_cast<std::size_t>(c.pos.row * (layout_.cols + 1) + c.pos.col)] = kFacing[c.facing];
  }
  for (const Pot& p : state_.pots) {
    out += "pot (" + std::to_string(p.pos.col) + "," + std::to_string(p.pos.row) + ") onions " +
           std::to_string(p.onions) + (p.cooking ? " cooking " + std::to_string(p.remaining) : "") + "\n";
  }
  return out;
}

}  // namespace cmarl::env

#include "cmarl/envs/spread.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <regex>

#include "cmarl/core/errors.hpp"

namespace cmarl::env {

int parse_spread_key(std::string_view raw) {
  std::string key(raw);
  if (key.starts_with("mpe:")) key = key.substr(4);
  static const std::regex grammar(R"(^SimpleSpread-(3|4|5|8)-v0$)");
  std::smatch m;
  if (!std::regex_match(key, m, grammar)) {
    raise(ErrorCode::UnknownKey, "unrecognized MPE key '" + std::string(raw) + "'");
  }
  return std::stoi(m[1].str());
}

namespace {

double dist(const Vec2& a, const Vec2& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

}  // namespace

void spread_observe(const ParticleWorld& world, int agent, std::span<double> out) {
  const auto self = static_cast<std::size_t>(agent);
  const Vec2& p = world.pos[self];
  std::size_t at = 0;
  out[at++] = world.vel[self][0];
  out[at++] = world.vel[self][1];
  out[at++] = p[0];
  out[at++] = p[1];
  for (const Vec2& l : world.landmarks) {
    out[at++] = l[0] - p[0];
    out[at++] = l[1] - p[1];
  }
  for (std::size_t j = 0; j < world.pos.size(); ++j) {
    if (j == self) continue;
    out[at++] = world.pos[j][0] - p[0];
    out[at++] = world.pos[j][1] - p[1];
  }
  std::fill(out.begin() + static_cast<std::ptrdiff_t>(at), out.end(), 0.0);
}

Vec spread_observe(const ParticleWorld& world, int agent) {
  Vec out(static_cast<std::size_t>(spread_obs_dim(static_cast<int>(world.pos.size()))));
  spread_observe(world, agent, out);
  return out;
}

Vec spread_reward(const ParticleWorld& world, const SpreadPhysics& physics) {
  const std::size_t n = world.pos.size();
  double shared = 0.0;
  for (const Vec2& l : world.landmarks) {
    double best = INFINITY;
    for (const Vec2& a : world.pos) best = std::min(best, dist(a, l));
    shared -= best;
  }
  Vec rewards(n, shared);
  const double touch = 2.0 * physics.agent_radius;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && dist(world.pos[i], world.pos[j]) < touch) rewards[i] -= 1.0;
    }
  }
  return rewards;
}

Vec spread_step(ParticleWorld& world, const SpreadPhysics& physics, std::span<const int> actions) {
  const std::size_t n = world.pos.size();
  std::vector<Vec2> force(n, Vec2{0.0, 0.0});
  for (std::size_t i = 0; i < n; ++i) {
    switch (actions[i]) {
      case kSpreadLeft: force[i][0] = -physics.accel; break;
      case kSpreadRight: force[i][0] = physics.accel; break;
      case kSpreadDown: force[i][1] = -physics.accel; break;
      case kSpreadUp: force[i][1] = physics.accel; break;
      default: break;
    }
  }
  // Soft contact between overlapping agents (softplus penetration).
  const double touch = 2.0 * physics.agent_radius;
  const double k = physics.contact_margin;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = world.pos[i][0] - world.pos[j][0];
      const double dy = world.pos[i][1] - world.pos[j][1];
      const double d = std::hypot(dx, dy);
      if (d >= touch || d == 0.0) continue;
      const double x = -(d - touch) / k;
      const double penetration = (x > 30.0 ? x : std::log1p(std::exp(x))) * k;
      const double f = physics.contact_force * penetration / d;
      force[i][0] += f * dx;
      force[i][1] += f * dy;
      force[j][0] -= f * dx;
      force[j][1] -= f * dy;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    Vec2& v = world.vel[i];
    v[0] = v[0] * (1.0 - physics.damping) + force[i][0] * physics.dt;
    v[1] = v[1] * (1.0 - physics.damping) + force[i][1] * physics.dt;
    if (physics.max_speed > 0.0) {
      const double speed = std::hypot(v[0], v[1]);
      if (speed > physics.max_speed) {
        v[0] *= physics.max_speed / speed;
        v[1] *= physics.max_speed / speed;
      }
    }
    world.pos[i][0] += v[0] * physics.dt;
    world.pos[i][1] += v[1] * physics.dt;
  }
  return spread_reward(world, physics);
}

ParticleWorld spread_spawn(int n_agents, RngStream& rng) {
  ParticleWorld world;
  for (int i = 0; i < n_agents; ++i) {
    const double x = rng.uniform(-1.0, 1.0);
    const double y = rng.uniform(-1.0, 1.0);
    world.pos.push_back({x, y});
    world.vel.push_back({0.0, 0.0});
  }
  for (int i = 0; i < n_agents; ++i) {
    const double x = rng.uniform(-1.0, 1.0);
    const double y = rng.uniform(-1.0, 1.0);
    world.landmarks.push_back({x, y});
  }
  return world;
}

SpreadEnv::SpreadEnv(const EnvConfig& config) : Environment(config, 25), n_(parse_spread_key(config.key)) {
  ExtrasReader extras(config.extras);
  physics_.dt = extras.get_double("dt", physics_.dt);
  physics_.damping = extras.get_double("damping", physics_.damping);
  physics_.accel = extras.get_double("accel", physics_.accel);
  physics_.agent_radius = extras.get_double("agent_radius", physics_.agent_radius);
  physics_.landmark_radius = extras.get_double("landmark_radius", physics_.landmark_radius);
  physics_.max_speed = extras.get_double("max_speed", physics_.max_speed);
  extras.finish();
  const int dim = spread_obs_dim(n_);
  set_spec(n_, kSpreadActions, dim, dim * n_);
}

void SpreadEnv::on_reset(RngStream& rng) { world_ = spread_spawn(n_, rng); }

Environment::Transition SpreadEnv::on_step(std::span<const int> actions, RngStream&) {
  Transition t;
  t.agent_rewards = spread_step(world_, physics_, actions);
  return t;
}

void SpreadEnv::observe(std::vector<Vec>& obs, Vec& state, RngStream&) {
  const auto dim = static_cast<std::size_t>(spread_obs_dim(n_));
  for (int i = 0; i < n_; ++i) {
    auto& o = obs[static_cast<std::size_t>(i)];
    spread_observe(world_, i, o);
    std::copy(o.begin(), o.end(), state.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(i) * dim));
  }
}

std::string SpreadEnv::render() const {
  std::string out;
  char buf[96];
  for (std::size_t i = 0; i < world_.pos.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "agent %zu pos (%.3f, %.3f) vel (%.3f, %.3f)\n", i, world_.pos[i][0],
                  world_.pos[i][1], world_.vel[i][0], world_.vel[i][1]);
    out += buf;
  }
  for (std::size_t i = 0; i < world_.landmarks.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "landmark %zu (%.3f, %.3f)\n", i, world_.landmarks[i][0],
                  world_.landmarks[i][1]);
    out += buf;
  }
  return out;
}

}  // namespace cmarl::env

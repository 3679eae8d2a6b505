#include "cmarl/core/episode.hpp"

#include <cstdio>

namespace cmarl {

AgentPolicy random_policy() {
  return [](int, const Vec&, int n_actions, RngStream& rng) {
    return static_cast<int>(rng.below(static_cast<std::uint32_t>(n_actions)));
  };
}

AgentPolicy constant_policy(int action) {
  return [action](int, const Vec&, int, RngStream&) { return action; };
}

EpisodeRecord run_episode(Environment& env, const AgentPolicy& policy, RngStream& rng) {
  EpisodeRecord record;
  ObsStateSnapshot snap = env.reset();
  const int n = env.n_agents();
  std::vector<int> actions(static_cast<std::size_t>(n));
  bool done = false;
  while (!done) {
    for (int i = 0; i < n; ++i) {
      actions[static_cast<std::size_t>(i)] =
          policy(i, snap.obs[static_cast<std::size_t>(i)], env.get_total_actions(), rng);
    }
    StepOutcome out = env.step(actions);
    EpisodeStep step;
    step.obs = std::move(snap.obs);
    step.state = std::move(snap.state);
    step.actions = actions;
    step.reward = out.reward;
    step.done = out.done;
    step.info = std::move(out.info);
    record.episode_return += step.reward;
    record.steps.push_back(std::move(step));
    snap.obs = env.get_obs();
    snap.state = env.get_state();
    done = out.done;
  }
  record.final_obs = std::move(snap.obs);
  record.final_state = std::move(snap.state);
  record.length = static_cast<int>(record.steps.size());
  return record;
}

namespace {

void append_vec(std::string& out, const Vec& v) {
  char buf[40];
  out += '[';
  for (double x : v) {
    std::snprintf(buf, sizeof(buf), "%a,", x);
    out += buf;
  }
  out += ']';
}

}  // namespace

std::string trajectory_log(const EpisodeRecord& record) {
  std::string out;
  for (const EpisodeStep& s : record.steps) {
    for (const Vec& o : s.obs) append_vec(out, o);
    append_vec(out, s.state);
    for (int a : s.actions) out += std::to_string(a) + ',';
    append_vec(out, {s.reward});
    append_vec(out, s.info.agent_rewards);
    out += s.done ? 'D' : '-';
    out += s.info.truncated ? 'T' : '-';
    out += '\n';
  }
  for (const Vec& o : record.final_obs) append_vec(out, o);
  append_vec(out, record.final_state);
  out += '\n';
  return out;
}

}  // namespace cmarl

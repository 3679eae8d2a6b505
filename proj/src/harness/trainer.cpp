#include "cmarl/harness/trainer.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <json.hpp>

#include "cmarl/algos/qmix.hpp"
#include "cmarl/core/errors.hpp"
#include "cmarl/harness/runner.hpp"

namespace cmarl::harness {

namespace fs = std::filesystem;

EvalResult evaluate(const algos::Learner& learner, const EnvConfig& env_config, int n_episodes, std::uint64_t seed,
                    std::int64_t step) {
  EnvConfig c = env_config;
  c.seed = seed;
  c.stream_id = 0;
  const EnvHandle env = make_env(c);
  RngStream rng(seed, 7);
  EvalResult out;
  int successes = 0;
  for (int k = 0; k < n_episodes; ++k) {
    const CollectedEpisode e = play_episode(*env, learner, algos::ActMode::Evaluate, 0, rng);
    out.returns.push_back(e.episode_return);
    successes += e.terminated ? 1 : 0;
  }
  out.row = summarize(step, out.returns);
  out.row.success_rate = n_episodes > 0 ? static_cast<double>(successes) / n_episodes : 0.0;
  return out;
}

EvalResult evaluate(const AgentPolicy& policy, const EnvConfig& env_config, int n_episodes, std::uint64_t seed,
                    std::int64_t step) {
  EnvConfig c = env_config;
  c.seed = seed;
  c.stream_id = 0;
  const EnvHandle env = make_env(c);
  RngStream rng(seed, 7);
  EvalResult out;
  int successes = 0;
  for (int k = 0; k < n_episodes; ++k) {
    const EpisodeRecord r = run_episode(*env, policy, rng);
    out.returns.push_back(r.episode_return);
    successes += !r.steps.empty() && r.steps.back().info.terminated ? 1 : 0;
  }
  out.row = summarize(step, out.returns);
  out.row.success_rate = n_episodes > 0 ? static_cast<double>(successes) / n_episodes : 0.0;
  return out;
}

std::string checkpoint_metadata(const RunConfig& run, std::uint64_t seed, std::int64_t step) {
  nlohmann::json j;
  j["settings"] = run.fields();
  j["seed"] = seed;
  j["step"] = step;
  return j.dump();
}

LoadedPolicy load_policy(const std::string& path) {
  const nn::Checkpoint ckpt = nn::load_checkpoint(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ckpt.metadata);
  } catch (const nlohmann::json::exception&) {
    raise(ErrorCode::Io, path + ": checkpoint metadata is not a run description");
  }
  const auto settings = j.at("settings").get<std::map<std::string, std::string>>();
  LoadedPolicy out;
  out.run = make_run_config(algos::parse_algorithm(settings.at("learner.algorithm")),
                            parse_family(settings.at("env.family")), settings.at("env.key"));
  for (const auto& [k, v] : settings) out.run.set(k, v);
  out.seed = j.at("seed").get<std::uint64_t>();
  out.step = j.at("step").get<std::int64_t>();
  EnvConfig env = out.run.env;
  env.seed = out.seed;
  out.learner = algos::make_learner(out.run.learner, make_env(env)->spec(), out.seed);
  out.learner->load(ckpt);
  return out;
}

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

std::string metrics_text(const std::vector<MetricsRow>& rows) {
  std::ostringstream out;
  write_metrics(out, rows);
  return out.str();
}

}  // namespace

RunResult train_seed(const RunConfig& run, std::uint64_t seed, const TrainHooks& hooks) {
  run.validate();
  const auto started = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count(); };

  RunResult result;
  result.seed = seed;
  fs::path dir;
  if (!run.output_dir.empty()) {
    dir = fs::path(run.output_dir) / ("seed_" + std::to_string(seed));
    fs::create_directories(dir / "checkpoints");
    result.directory = dir.string();
  }

  const bool on_policy = run.learner.algorithm != algos::Algorithm::Qmix;
  const int workers = on_policy ? run.learner.parallel_runners : 1;
  ParallelRunner runner(run.env, workers, seed, available_threads());
  const std::unique_ptr<algos::Learner> learner = algos::make_learner(run.learner, runner.spec(), seed);
  if (auto* q = dynamic_cast<algos::QmixLearner*>(learner.get())) q->set_training_horizon(run.total_steps);
  RngStream train_rng(seed, 2);

  std::int64_t t_env = 0;
  auto save_checkpoint = [&](const std::string& name) {
    if (dir.empty() || !run.save_checkpoints) return;
    nn::save_checkpoint((dir / "checkpoints" / name).string(), learner->checkpoint(checkpoint_metadata(run, seed, t_env)));
  };
  auto evaluation = [&]() {
    EvalResult e = evaluate(*learner, run.env, run.n_test_episodes, eval_seed(seed), t_env);
    e.row.wall_seconds = elapsed();
    result.rows.push_back(e.row);
    if (!dir.empty()) write_file(dir / "metrics.csv", metrics_text(result.rows));
    save_checkpoint("step_" + std::to_string(t_env) + ".ckpt");
    if (hooks.on_eval) hooks.on_eval(e.row);
    return hooks.stop_when && hooks.stop_when(e.row);
  };

  bool stop = evaluation();
  std::int64_t next_eval = run.eval_interval;
  try {
    while (!stop && t_env < run.total_steps) {
      std::vector<CollectedEpisode> batch = runner.collect(*learner, algos::ActMode::Explore, t_env);
      std::vector<algos::Rollout> rollouts;
      for (CollectedEpisode& c : batch) {
        t_env += c.rollout.episode.length;
        rollouts.push_back(std::move(c.rollout));
      }
      learner->train(std::move(rollouts), t_env, train_rng);
      while (!stop && next_eval <= run.total_steps && t_env >= next_eval) {
        stop = evaluation();
        next_eval += run.eval_interval;
      }
    }
  } catch (const Error&) {
    save_checkpoint("abort.ckpt");
    throw;
  }

  result.stopped_early = stop;
  result.steps = t_env;
  result.updates = learner->update_count();
  result.wall_seconds = elapsed();
  result.state_digest = learner->state_digest();
  if (!dir.empty()) {
    nlohmann::json j;
    j["settings"] = run.fields();
    j["seed"] = seed;
    j["steps"] = result.steps;
    j["updates"] = result.updates;
    j["wall_seconds"] = result.wall_seconds;
    j["stopped_early"] = result.stopped_early;
    j["best_policy_metric"] = best_policy_metric(result.rows);
    write_file(dir / "run.json", j.dump(2) + "\n");
  }
  return result;
}

std::vector<RunResult> train(const RunConfig& run, const TrainHooks& hooks) {
  std::vector<RunResult> out;
  for (std::uint64_t seed : run.seeds) out.push_back(train_seed(run, seed, hooks));
  return out;
}

}  // namespace cmarl::harness

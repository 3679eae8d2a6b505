// Command-line front end: train, eval, aggregate, serve, bench, tasks.

#include <CLI11.hpp>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <map>
#include <thread>

#include "cmarl/core/env.hpp"
#include "cmarl/core/errors.hpp"
#include "cmarl/harness/bench.hpp"
#include "cmarl/harness/metrics.hpp"
#include "cmarl/harness/run_config.hpp"
#include "cmarl/harness/runner.hpp"
#include "cmarl/harness/trainer.hpp"
#include "cmarl/server/server.hpp"

namespace fs = std::filesystem;
using namespace cmarl;

namespace {

volatile std::sig_atomic_t g_stop = 0;

std::pair<std::string, std::string> split_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) raise(ErrorCode::BadConfig, "--set expects section.field=value, got '" + text + "'");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

int run_train(const std::string& algo_name, const std::string& family, const std::string& key,
              const std::vector<std::string>& config_files, const std::vector<std::string>& sets,
              const std::vector<std::uint64_t>& seeds, std::int64_t steps, const std::string& out) {
  const algos::Algorithm algo = algos::parse_algorithm(algo_name);
  harness::RunConfig run = harness::make_run_config(algo, parse_family(family), key);
  const std::string defaults = harness::default_config_path(algo);
  if (fs::exists(defaults)) harness::apply_config_file(run, defaults);
  for (const std::string& f : config_files) harness::apply_config_file(run, f);
  if (steps > 0) run.total_steps = steps;
  if (!seeds.empty()) run.seeds = seeds;
  if (!out.empty()) run.output_dir = out;
  for (const std::string& s : sets) {
    const auto [field, value] = split_assignment(s);
    run.set(field, value);
  }
  run.validate();
  harness::TrainHooks hooks;
  hooks.on_eval = [](const harness::MetricsRow& r) {
    std::cout << "step " << r.step << "  mean " << r.mean_return << "  std " << r.std << "  min " << r.min << "  max "
              << r.max << "  (" << std::fixed << std::setprecision(1) << r.wall_seconds << " s)" << std::defaultfloat
              << std::setprecision(6) << std::endl;
  };
  for (const harness::RunResult& r : harness::train(run, hooks)) {
    std::cout << "seed " << r.seed << ": " << r.steps << " steps, " << r.updates << " updates, best "
              << harness::best_policy_metric(r.rows) << ", " << r.wall_seconds << " s -> " << r.directory << "\n";
  }
  return 0;
}

int run_eval(const std::string& checkpoint, int episodes, std::optional<std::uint64_t> seed) {
  const harness::LoadedPolicy p = harness::load_policy(checkpoint);
  const std::uint64_t s = seed ? *seed : harness::eval_seed(p.seed);
  const harness::EvalResult r = harness::evaluate(*p.learner, p.run.env, episodes, s, p.step);
  std::cout << harness::kMetricsHeader << "\n" << harness::format_metrics_row(r.row) << "\n";
  std::cerr << "success_rate " << r.row.success_rate << "\n";
  return 0;
}

int run_aggregate(const std::string& dir) {
  // task -> algorithm -> per-seed best metrics
  std::map<std::string, std::map<std::string, std::vector<double>>> found;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.path().filename() != "run.json") continue;
    std::ifstream in(entry.path());
    const nlohmann::json j = nlohmann::json::parse(in);
    const auto& settings = j.at("settings");
    const std::string task = settings.at("env.family").get<std::string>() + "/" + settings.at("env.key").get<std::string>();
    const std::string algo = settings.at("learner.algorithm").get<std::string>();
    const auto rows = harness::read_metrics_file((entry.path().parent_path() / "metrics.csv").string());
    found[task][algo].push_back(harness::best_policy_metric(rows));
  }
  if (found.empty()) raise(ErrorCode::EmptyStream, "no run.json under " + dir);
  std::map<std::string, std::map<std::string, double>> scores;
  std::cout << "task,algorithm,seeds,best_policy_mean\n";
  for (const auto& [task, by_algo] : found) {
    for (const auto& [algo, values] : by_algo) {
      double mean = 0;
      for (double v : values) mean += v / static_cast<double>(values.size());
      scores[task][algo] = mean;
      std::cout << task << "," << algo << "," << values.size() << "," << mean << "\n";
    }
  }
  std::cout << "\nalgorithm,normalized_score\n";
  for (const auto& [algo, s] : harness::aggregate_normalized(scores)) std::cout << algo << "," << s << "\n";
  return 0;
}

int run_serve(const std::string& bind, std::optional<int> port, int max_sessions) {
  const auto p = port ? static_cast<std::uint16_t>(*port) : server::port_from_environment();
  server::Server srv(bind, p, max_sessions);
  srv.start();
  std::cout << "listening on " << bind << ":" << srv.port() << std::endl;
  std::signal(SIGINT, [](int) { g_stop = 1; });
  std::signal(SIGTERM, [](int) { g_stop = 1; });
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  srv.stop();
  return 0;
}

int run_bench(const std::string& family, const std::string& key, std::int64_t steps, int workers) {
  EnvConfig c;
  c.family = parse_family(family);
  c.key = key;
  const harness::Throughput one = harness::random_stepping(c, steps);
  std::cout << "single thread: " << std::fixed << std::setprecision(0) << one.steps_per_second() << " steps/s\n";
  if (workers > 1) {
    const harness::Throughput base = harness::parallel_random_stepping(c, 1, steps);
    const harness::Throughput par = harness::parallel_random_stepping(c, workers, steps);
    std::cout << workers << " workers: " << par.steps_per_second() << " steps/s, scaling " << std::setprecision(2)
              << par.steps_per_second() / base.steps_per_second() << "x on " << harness::available_threads()
              << " hardware threads\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative multi-agent RL environments, learners and evaluation harness"};
  app.require_subcommand(1);

  std::string algo, family, key, out, checkpoint, runs, bind = "127.0.0.1";
  std::vector<std::string> sets, config_files;
  std::vector<std::uint64_t> seeds;
  std::int64_t steps = 0;
  int episodes = 100, max_sessions = 64, workers = 8;
  std::optional<int> port;
  std::optional<std::uint64_t> eval_seed;

  auto* train = app.add_subcommand("train", "Train a learner and write metrics and checkpoints");
  train->add_option("--algo", algo, "qmix | maa2c | mappo")->required();
  train->add_option("--env", family, "Environment family (gymma, capturetarget, ...)")->required();
  train->add_option("--key", key, "Task key")->required();
  train->add_option("--config", config_files, "Extra INI files applied after configs/<algo>.cfg");
  train->add_option("--set", sets, "Override section.field=value (repeatable)");
  train->add_option("--seed", seeds, "Seed (repeatable)");
  train->add_option("--steps", steps, "Total environment steps");
  train->add_option("--out", out, "Output directory");

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval->add_option("--checkpoint", checkpoint)->required();
  eval->add_option("--episodes", episodes);
  eval->add_option("--seed", eval_seed, "Evaluation seed (default: the run's evaluation seed)");

  auto* aggregate = app.add_subcommand("aggregate", "Best-policy table and normalized scores over a runs tree");
  aggregate->add_option("--runs", runs)->required();

  auto* serve = app.add_subcommand("serve", "Serve environments over TCP");
  serve->add_option("--port", port, "Port (default $CMARL_PORT or 7878)");
  serve->add_option("--bind", bind);
  serve->add_option("--max-sessions", max_sessions);

  auto* bench = app.add_subcommand("bench", "Random-policy stepping throughput");
  bench->add_option("--env", family)->required();
  bench->add_option("--key", key)->required();
  bench->add_option("--steps", steps)->default_val(200000);
  bench->add_option("--workers", workers);

  auto* tasks = app.add_subcommand("tasks", "List environment keys");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train) return run_train(algo, family, key, config_files, sets, seeds, steps, out);
    if (*eval) return run_eval(checkpoint, episodes, eval_seed);
    if (*aggregate) return run_aggregate(runs);
    if (*serve) return run_serve(bind, port, max_sessions);
    if (*bench) return run_bench(family, key, steps, workers);
    if (*tasks) {
      for (const auto& [f, k] : known_tasks()) std::cout << family_name(f) << " " << k << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return 2;
  }
  return 1;
}

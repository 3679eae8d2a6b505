#include "cmarl/harness/run_config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <sstream>

#include "cmarl/core/env.hpp"
#include "cmarl/core/errors.hpp"

namespace cmarl::harness {

namespace {

template <typename Int>
Int parse_integer(std::string_view field, std::string_view v) {
  Int out{};
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size()) {
    raise(ErrorCode::BadConfig, std::string(field) + ": expected an integer, got '" + std::string(v) + "'");
  }
  return out;
}

std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

std::string extra_text(const ExtraValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::string>) {
          return x;
        } else if constexpr (std::is_same_v<T, double>) {
          char buf[64];
          const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
          std::string s(buf, end);
          if (s.find_first_of(".e") == std::string::npos) s += ".0";
          return s;
        } else {
          return std::to_string(x);
        }
      },
      v);
}

}  // namespace

void RunConfig::set(std::string_view dotted, std::string_view value) {
  const auto dot = dotted.find('.');
  if (dot == std::string_view::npos) raise(ErrorCode::BadConfig, "expected section.field, got '" + std::string(dotted) + "'");
  const std::string_view section = dotted.substr(0, dot), field = dotted.substr(dot + 1);
  const std::string v = trim(value);
  if (section == "learner") {
    learner.set(field, v);
  } else if (section == "run") {
    if (field == "total_steps") {
      total_steps = parse_integer<std::int64_t>(dotted, v);
    } else if (field == "eval_interval") {
      eval_interval = parse_integer<std::int64_t>(dotted, v);
    } else if (field == "n_test_episodes") {
      n_test_episodes = parse_integer<int>(dotted, v);
    } else if (field == "output_dir") {
      output_dir = v;
    } else if (field == "save_checkpoints") {
      if (v != "true" && v != "false") raise(ErrorCode::BadConfig, std::string(dotted) + ": expected true or false");
      save_checkpoints = v == "true";
    } else if (field == "seeds") {
      seeds.clear();
      std::stringstream in(v);
      for (std::string item; std::getline(in, item, ',');) seeds.push_back(parse_integer<std::uint64_t>(dotted, trim(item)));
    } else {
      raise(ErrorCode::BadConfig, "unknown setting '" + std::string(dotted) + "'");
    }
  } else if (section == "env") {
    if (field == "family") {
      env.family = parse_family(v);
    } else if (field == "key") {
      env.key = v;
    } else if (field == "time_limit") {
      env.time_limit = parse_integer<int>(dotted, v);
    } else if (field == "seed") {
      raise(ErrorCode::BadConfig, "env.seed is taken from run.seeds");
    } else {
      env.extras[std::string(field)] = parse_extra_value(v);
    }
  } else {
    raise(ErrorCode::BadConfig, "unknown section '" + std::string(section) + "'");
  }
}

std::map<std::string, std::string> RunConfig::fields() const {
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : learner.fields()) out["learner." + k] = v;
  out["run.total_steps"] = std::to_string(total_steps);
  out["run.eval_interval"] = std::to_string(eval_interval);
  out["run.n_test_episodes"] = std::to_string(n_test_episodes);
  out["run.output_dir"] = output_dir;
  out["run.save_checkpoints"] = save_checkpoints ? "true" : "false";
  std::string s;
  for (std::uint64_t seed : seeds) s += (s.empty() ? "" : ",") + std::to_string(seed);
  out["run.seeds"] = s;
  out["env.family"] = std::string(family_name(env.family));
  out["env.key"] = env.key;
  if (env.time_limit) out["env.time_limit"] = std::to_string(*env.time_limit);
  for (const auto& [k, v] : env.extras) out["env." + k] = extra_text(v);
  return out;
}

void RunConfig::validate() const {
  learner.validate();
  if (total_steps <= 0) raise(ErrorCode::BadConfig, "run.total_steps must be positive");
  if (eval_interval <= 0 || eval_interval > total_steps) {
    raise(ErrorCode::BadConfig, "run.eval_interval must lie in (0, total_steps]");
  }
  if (n_test_episodes < 1) raise(ErrorCode::BadConfig, "run.n_test_episodes must be at least 1");
  if (seeds.empty()) raise(ErrorCode::BadConfig, "run.seeds needs at least one seed");
  make_env(env);
}

RunConfig make_run_config(algos::Algorithm algo, EnvFamily family, std::string key) {
  RunConfig run;
  run.learner = algos::LearnerConfig::defaults_for(algo);
  run.env.family = family;
  run.env.key = std::move(key);
  for (const char* separate : {"SimpleSpread-4-v0", "SimpleSpread-5-v0", "mpe:SimpleSpread-4-v0", "mpe:SimpleSpread-5-v0"}) {
    if (run.env.key == separate) run.learner.share_parameters = false;
  }
  return run;
}

void apply_config_file(RunConfig& run, const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    raise(ErrorCode::Io, e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) raise(ErrorCode::BadConfig, path + ": setting '" + section + "' outside a section");
    for (const auto& [field, value] : body) run.set(section + "." + field, value.data());
  }
}

std::string default_config_path(algos::Algorithm algo) {
  return std::string(CMARL_SOURCE_DIR) + "/configs/" + std::string(algos::algorithm_name(algo)) + ".cfg";
}

}  // namespace cmarl::harness

#include "cmarl/algos/config.hpp"

#include <charconv>
#include <functional>
#include <sstream>

#include "cmarl/core/errors.hpp"

namespace cmarl::algos {

namespace {

bool parse_bool(std::string_view field, std::string_view v) {
  if (v == "true" || v == "True" || v == "1") return true;
  if (v == "false" || v == "False" || v == "0") return false;
  raise(ErrorCode::BadConfig, std::string(field) + ": expected a boolean, got '" + std::string(v) + "'");
}

int parse_int(std::string_view field, std::string_view v) {
  int out = 0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size()) {
    raise(ErrorCode::BadConfig, std::string(field) + ": expected an integer, got '" + std::string(v) + "'");
  }
  return out;
}

double parse_double(std::string_view field, std::string_view v) {
  try {
    std::size_t used = 0;
    const std::string s(v);
    const double out = std::stod(s, &used);
    if (used == s.size()) return out;
  } catch (const std::exception&) {
  }
  raise(ErrorCode::BadConfig, std::string(field) + ": expected a number, got '" + std::string(v) + "'");
}

std::string fmt(double v) {
  std::ostringstream o;
  o.precision(17);
  o << v;
  return o.str();
}

struct Field {
  std::function<void(LearnerConfig&, std::string_view)> set;
  std::function<std::string(const LearnerConfig&)> get;
};

#define CMARL_BOOL(name) \
  {#name, {[](LearnerConfig& c, std::string_view v) { c.name = parse_bool(#name, v); }, \
           [](const LearnerConfig& c) { return std::string(c.name ? "true" : "false"); }}}
#define CMARL_INT(name) \
  {#name, {[](LearnerConfig& c, std::string_view v) { c.name = parse_int(#name, v); }, \
           [](const LearnerConfig& c) { return std::to_string(c.name); }}}
#define CMARL_REAL(name) \
  {#name, {[](LearnerConfig& c, std::string_view v) { c.name = parse_double(#name, v); }, \
           [](const LearnerConfig& c) { return fmt(c.name); }}}

const std::map<std::string, Field, std::less<>>& field_table() {
  static const std::map<std::string, Field, std::less<>> table = {
      {"algorithm", {[](LearnerConfig& c, std::string_view v) { c.algorithm = parse_algorithm(v); },
                     [](const LearnerConfig& c) { return std::string(algorithm_name(c.algorithm)); }}},
      {"optimizer", {[](LearnerConfig& c, std::string_view v) {
                       if (v != "adam" && v != "rmsprop") raise(ErrorCode::BadConfig, "optimizer must be adam or rmsprop");
                       c.optimizer = std::string(v);
                     },
                     [](const LearnerConfig& c) { return c.optimizer; }}},
      CMARL_REAL(gamma),
      CMARL_REAL(learning_rate),
      CMARL_INT(hidden_dimension),
      CMARL_BOOL(reward_standardisation),
      CMARL_BOOL(observation_agent_id),
      CMARL_BOOL(observation_last_action),
      CMARL_BOOL(share_parameters),
      CMARL_INT(batch_size),
      CMARL_INT(buffer_size),
      CMARL_INT(target_update),
      CMARL_REAL(grad_norm_clip),
      CMARL_REAL(epsilon_start),
      CMARL_REAL(epsilon_finish),
      CMARL_INT(epsilon_anneal),
      CMARL_REAL(evaluation_epsilon),
      CMARL_INT(mixing_network_hidden_dimension),
      CMARL_INT(hypernetwork_dimension),
      CMARL_INT(hypernetwork_layers),
      CMARL_BOOL(double_q),
      CMARL_BOOL(prioritized_replay),
      CMARL_REAL(per_alpha),
      CMARL_REAL(per_beta_start),
      CMARL_REAL(per_beta_end),
      CMARL_REAL(per_eps),
      CMARL_INT(parallel_runners),
      CMARL_INT(n_step),
      CMARL_REAL(entropy_coefficient),
      CMARL_INT(epochs),
      CMARL_REAL(clip),
  };
  return table;
}

#undef CMARL_BOOL
#undef CMARL_INT
#undef CMARL_REAL

}  // namespace

Algorithm parse_algorithm(std::string_view name) {
  if (name == "qmix") return Algorithm::Qmix;
  if (name == "maa2c") return Algorithm::Maa2c;
  if (name == "mappo") return Algorithm::Mappo;
  raise(ErrorCode::BadConfig, "unknown algorithm '" + std::string(name) + "'");
}

std::string_view algorithm_name(Algorithm algo) {
  switch (algo) {
    case Algorithm::Qmix: return "qmix";
    case Algorithm::Maa2c: return "maa2c";
    case Algorithm::Mappo: return "mappo";
  }
  return "?";
}

LearnerConfig LearnerConfig::defaults_for(Algorithm algo) {
  LearnerConfig c;
  c.algorithm = algo;
  if (algo != Algorithm::Qmix) {
    c.batch_size = 10;
    c.buffer_size = 10;
    c.parallel_runners = 10;
    c.epochs = algo == Algorithm::Mappo ? 4 : 1;
  }
  return c;
}

void LearnerConfig::set(std::string_view field, std::string_view value) {
  const auto& table = field_table();
  const auto it = table.find(field);
  if (it == table.end()) raise(ErrorCode::BadConfig, "unknown learner field '" + std::string(field) + "'");
  it->second.set(*this, value);
}

std::map<std::string, std::string> LearnerConfig::fields() const {
  std::map<std::string, std::string> out;
  for (const auto& [name, f] : field_table()) out[name] = f.get(*this);
  return out;
}

void LearnerConfig::validate() const {
  auto need = [](bool ok, const char* what) {
    if (!ok) raise(ErrorCode::BadConfig, what);
  };
  need(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0, 1]");
  need(learning_rate > 0.0, "learning_rate must be positive");
  need(hidden_dimension >= 1, "hidden_dimension must be >= 1");
  need(batch_size >= 1 && buffer_size >= batch_size, "need 1 <= batch_size <= buffer_size");
  need(target_update >= 1, "target_update must be >= 1");
  need(epsilon_anneal >= 1, "epsilon_anneal must be >= 1");
  need(mixing_network_hidden_dimension >= 1 && hypernetwork_dimension >= 1, "mixer dims must be >= 1");
  need(hypernetwork_layers == 1 || hypernetwork_layers == 2, "hypernetwork_layers must be 1 or 2");
  need(parallel_runners >= 1 && n_step >= 1 && epochs >= 1, "runner, n_step and epochs must be >= 1");
  need(clip > 0.0 && clip < 1.0, "clip must lie in (0, 1)");
  need(per_eps > 0.0 && per_alpha >= 0.0, "bad prioritized replay settings");
}

}  // namespace cmarl::algos

#pragma once

#include <map>
#include <string>
#include <string_view>

namespace cmarl::algos {

enum class Algorithm { Qmix, Maa2c, Mappo };

Algorithm parse_algorithm(std::string_view name);
std::string_view algorithm_name(Algorithm algo);

/// Learner hyperparameters. Field names follow the hyperparameter tables;
/// `defaults_for` fills in each algorithm's table values.
struct LearnerConfig {
  Algorithm algorithm = Algorithm::Qmix;

  // shared
  double gamma = 0.99;
  double learning_rate = 0.0005;
  int hidden_dimension = 64;
  bool reward_standardisation = true;
  bool observation_agent_id = true;
  bool observation_last_action = true;
  bool share_parameters = true;
  std::string optimizer = "adam";  // adam | rmsprop
  int batch_size = 32;
  int buffer_size = 5000;
  int target_update = 200;  // episodes trained on between hard target copies
  double grad_norm_clip = 10.0;

  // qmix
  double epsilon_start = 1.0;
  double epsilon_finish = 0.05;
  int epsilon_anneal = 50000;
  double evaluation_epsilon = 0.0;
  int mixing_network_hidden_dimension = 32;
  int hypernetwork_dimension = 64;
  int hypernetwork_layers = 2;
  bool double_q = false;
  bool prioritized_replay = false;
  double per_alpha = 0.6;
  double per_beta_start = 0.4;
  double per_beta_end = 1.0;
  double per_eps = 1e-6;

  // maa2c / mappo
  int parallel_runners = 10;
  int n_step = 5;
  double entropy_coefficient = 0.01;
  int epochs = 1;
  double clip = 0.2;

  static LearnerConfig defaults_for(Algorithm algo);

  /// Assigns one field from text; raises BadConfig for unknown names or bad values.
  void set(std::string_view field, std::string_view value);
  std::map<std::string, std::string> fields() const;
  void validate() const;
};

}  // namespace cmarl::algos

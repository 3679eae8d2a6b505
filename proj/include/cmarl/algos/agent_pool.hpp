#pragma once

#include <string>
#include <vector>

#include "cmarl/nn/network.hpp"

namespace cmarl::algos {

/// Per-agent network input: obs, then one-hot(last action), then one-hot(agent id).
struct AgentInputSpec {
  int obs_dim = 0;
  int n_actions = 0;
  int n_agents = 0;
  bool last_action = true;
  bool agent_id = true;

  int dim() const { return obs_dim + (last_action ? n_actions : 0) + (agent_id ? n_agents : 0); }
};

/// Writes the inputs of every agent of environment `env` into columns
/// env * n_agents + i. `obs` holds n_agents * obs_dim values; `last_actions`
/// may be null at the first step.
void write_agent_inputs(const AgentInputSpec& spec, const double* obs, const int* last_actions, Eigen::Index env,
                        nn::Mat& out);

/// The agents' networks: one shared network, or one per agent. Columns are
/// ordered env-major (column = env * n_agents + agent).
class AgentPool {
 public:
  struct Tape {
    std::vector<nn::Tape> nets;
  };

  AgentPool() = default;
  AgentPool(const nn::NetSpec& spec, int n_agents, bool shared, nn::ParameterStore& store, const std::string& prefix);

  int n_agents() const { return n_agents_; }
  bool shared() const { return nets_.size() == 1; }
  const nn::NetSpec& spec() const { return nets_.front().spec(); }

  void init(nn::ParameterStore& store, RngStream& rng) const;
  nn::Mat initial_hidden(Eigen::Index columns) const { return nets_.front().initial_hidden(columns); }

  nn::Mat forward(const nn::ParameterStore& store, const nn::Mat& inputs, const nn::Mat& hidden, nn::Mat& hidden_out,
                  Tape* tape) const;
  /// Returns the input gradient; writes the hidden-input gradient if requested.
  nn::Mat backward(nn::ParameterStore& store, const Tape& tape, const nn::Mat& doutput, const nn::Mat* dhidden_out,
                   nn::Mat* dhidden_in) const;

 private:
  static nn::Mat gather(const nn::Mat& m, int agent, int n_agents);
  static void scatter(const nn::Mat& part, int agent, int n_agents, nn::Mat& out);

  int n_agents_ = 0;
  std::vector<nn::Network> nets_;
};

}  // namespace cmarl::algos

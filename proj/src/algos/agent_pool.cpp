#include "cmarl/algos/agent_pool.hpp"

#include "cmarl/core/errors.hpp"

namespace cmarl::algos {

void write_agent_inputs(const AgentInputSpec& spec, const double* obs, const int* last_actions, Eigen::Index env,
                        nn::Mat& out) {
  for (int i = 0; i < spec.n_agents; ++i) {
    auto col = out.col(env * spec.n_agents + i);
    col.setZero();
    for (int k = 0; k < spec.obs_dim; ++k) col(k) = obs[i * spec.obs_dim + k];
    int offset = spec.obs_dim;
    if (spec.last_action) {
      if (last_actions) col(offset + last_actions[i]) = 1.0;
      offset += spec.n_actions;
    }
    if (spec.agent_id) col(offset + i) = 1.0;
  }
}

AgentPool::AgentPool(const nn::NetSpec& spec, int n_agents, bool shared, nn::ParameterStore& store,
                     const std::string& prefix)
    : n_agents_(n_agents) {
  if (n_agents < 1) raise(ErrorCode::DimMismatch, "agent pool needs at least one agent");
  if (shared) {
    nets_.emplace_back(spec, store, prefix);
  } else {
    for (int i = 0; i < n_agents; ++i) nets_.emplace_back(spec, store, prefix + std::to_string(i));
  }
}

void AgentPool::init(nn::ParameterStore& store, RngStream& rng) const {
  for (const nn::Network& n : nets_) n.init(store, rng);
}

nn::Mat AgentPool::gather(const nn::Mat& m, int agent, int n_agents) {
  const Eigen::Index envs = m.cols() / n_agents;
  nn::Mat out(m.rows(), envs);
  for (Eigen::Index e = 0; e < envs; ++e) out.col(e) = m.col(e * n_agents + agent);
  return out;
}

void AgentPool::scatter(const nn::Mat& part, int agent, int n_agents, nn::Mat& out) {
  for (Eigen::Index e = 0; e < part.cols(); ++e) out.col(e * n_agents + agent) = part.col(e);
}

nn::Mat AgentPool::forward(const nn::ParameterStore& store, const nn::Mat& inputs, const nn::Mat& hidden,
                           nn::Mat& hidden_out, Tape* tape) const {
  if (tape) tape->nets.assign(nets_.size(), nn::Tape{});
  if (shared()) {
    return nets_[0].forward(store, inputs, &hidden, &hidden_out, tape ? &tape->nets[0] : nullptr);
  }
  if (inputs.cols() % n_agents_ != 0) raise(ErrorCode::DimMismatch, "column count is not a multiple of n_agents");
  nn::Mat out(spec().output_dim, inputs.cols());
  hidden_out.resize(spec().hidden_dim, inputs.cols());
  const bool recurrent = nets_[0].recurrent();
  for (int i = 0; i < n_agents_; ++i) {
    const nn::Mat h = recurrent ? gather(hidden, i, n_agents_) : nn::Mat();
    nn::Mat h_next;
    const nn::Mat y = nets_[static_cast<std::size_t>(i)].forward(store, gather(inputs, i, n_agents_), &h, &h_next,
                                                                 tape ? &tape->nets[static_cast<std::size_t>(i)] : nullptr);
    scatter(y, i, n_agents_, out);
    if (recurrent) scatter(h_next, i, n_agents_, hidden_out);
  }
  return out;
}

nn::Mat AgentPool::backward(nn::ParameterStore& store, const Tape& tape, const nn::Mat& doutput,
                            const nn::Mat* dhidden_out, nn::Mat* dhidden_in) const {
  if (shared()) return nets_[0].backward(store, tape.nets[0], doutput, dhidden_out, dhidden_in);
  nn::Mat dinput(spec().input_dim, doutput.cols());
  const bool recurrent = nets_[0].recurrent();
  if (!recurrent) dhidden_in = nullptr;
  if (dhidden_in) dhidden_in->resize(spec().hidden_dim, doutput.cols());
  for (int i = 0; i < n_agents_; ++i) {
    nn::Mat dh_out_part;
    if (dhidden_out && recurrent) dh_out_part = gather(*dhidden_out, i, n_agents_);
    nn::Mat dh_in_part;
    const nn::Mat dx = nets_[static_cast<std::size_t>(i)].backward(
        store, tape.nets[static_cast<std::size_t>(i)], gather(doutput, i, n_agents_),
        dhidden_out && recurrent ? &dh_out_part : nullptr, dhidden_in ? &dh_in_part : nullptr);
    scatter(dx, i, n_agents_, dinput);
    if (dhidden_in) scatter(dh_in_part, i, n_agents_, *dhidden_in);
  }
  return dinput;
}

}  // namespace cmarl::algos

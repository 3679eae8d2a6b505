#include "cmarl/algos/mixer.hpp"

#include <cmath>

#include "cmarl/core/errors.hpp"

namespace cmarl::algos {

namespace {

nn::Mat elu(const nn::Mat& x) {
  return x.unaryExpr([](double v) { return v > 0 ? v : std::expm1(v); });
}

nn::Mat elu_grad(const nn::Mat& x) {
  return x.unaryExpr([](double v) { return v > 0 ? 1.0 : std::exp(v); });
}

nn::Mat sign(const nn::Mat& x) {
  return x.unaryExpr([](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); });
}

}  // namespace

QMixer::QMixer(const MixerSpec& spec, nn::ParameterStore& store, const std::string& prefix) : spec_(spec) {
  const int S = spec.state_dim, E = spec.embed_dim, H = spec.hypernet_dim, N = spec.n_agents;
  if (N < 1 || S < 1 || E < 1 || H < 1) raise(ErrorCode::DimMismatch, "mixer dims must be >= 1");
  if (spec.hypernet_layers == 2) {
    w1_a_ = nn::Linear(store, prefix + ".hyper_w1.0", S, H);
    w1_b_ = nn::Linear(store, prefix + ".hyper_w1.2", H, N * E);
    w2_a_ = nn::Linear(store, prefix + ".hyper_w2.0", S, H);
    w2_b_ = nn::Linear(store, prefix + ".hyper_w2.2", H, E);
  } else if (spec.hypernet_layers == 1) {
    w1_a_ = nn::Linear(store, prefix + ".hyper_w1", S, N * E);
    w2_a_ = nn::Linear(store, prefix + ".hyper_w2", S, E);
  } else {
    raise(ErrorCode::BadConfig, "hypernet_layers must be 1 or 2");
  }
  b1_ = nn::Linear(store, prefix + ".hyper_b1", S, E);
  v_a_ = nn::Linear(store, prefix + ".V.0", S, E);
  v_b_ = nn::Linear(store, prefix + ".V.2", E, 1);
}

void QMixer::init(nn::ParameterStore& store, RngStream& rng) const {
  w1_a_.init(store, rng);
  w2_a_.init(store, rng);
  if (spec_.hypernet_layers == 2) {
    w1_b_.init(store, rng);
    w2_b_.init(store, rng);
  }
  b1_.init(store, rng);
  v_a_.init(store, rng);
  v_b_.init(store, rng);
}

nn::Mat QMixer::forward(const nn::ParameterStore& store, const nn::Mat& agent_qs, const nn::Mat& states,
                        Cache* cache) const {
  const int N = spec_.n_agents, E = spec_.embed_dim;
  if (agent_qs.rows() != N || states.rows() != spec_.state_dim || agent_qs.cols() != states.cols()) {
    raise(ErrorCode::DimMismatch, "mixer inputs do not match its spec");
  }
  Cache local;
  Cache& c = cache ? *cache : local;
  c.state = states;
  c.agent_qs = agent_qs;
  if (spec_.hypernet_layers == 2) {
    c.w1_pre = w1_a_.forward(store, states);
    c.w1_raw = w1_b_.forward(store, nn::relu(c.w1_pre));
    c.w2_pre = w2_a_.forward(store, states);
    c.w2_raw = w2_b_.forward(store, nn::relu(c.w2_pre));
  } else {
    c.w1_raw = w1_a_.forward(store, states);
    c.w2_raw = w2_a_.forward(store, states);
  }
  c.hidden_pre = b1_.forward(store, states);
  // w1_raw rows are laid out agent-major: row i * E + j is W1[i][j].
  for (int i = 0; i < N; ++i) {
    c.hidden_pre.array() += c.w1_raw.middleRows(static_cast<Eigen::Index>(i) * E, E).array().abs() *
                            agent_qs.row(i).replicate(E, 1).array();
  }
  c.v_pre = v_a_.forward(store, states);
  nn::Mat out = v_b_.forward(store, nn::relu(c.v_pre));
  out.array() += (elu(c.hidden_pre).array() * c.w2_raw.array().abs()).colwise().sum();
  return out;
}

nn::Mat QMixer::backward(nn::ParameterStore& store, const Cache& c, const nn::Mat& dq_tot) const {
  const int N = spec_.n_agents, E = spec_.embed_dim;
  if (dq_tot.rows() != 1 || dq_tot.cols() != c.state.cols()) raise(ErrorCode::DimMismatch, "mixer output gradient");
  const nn::Mat dy_e = dq_tot.replicate(E, 1);  // (E x M)

  // value head
  v_a_.backward_params(store, c.state, nn::relu_backward(c.v_pre, v_b_.backward(store, nn::relu(c.v_pre), dq_tot)));

  // final weights
  const nn::Mat hidden = elu(c.hidden_pre);
  const nn::Mat dw2_raw = (dy_e.array() * hidden.array() * sign(c.w2_raw).array()).matrix();
  const nn::Mat dhidden_pre =
      (dy_e.array() * c.w2_raw.array().abs() * elu_grad(c.hidden_pre).array()).matrix();

  b1_.backward_params(store, c.state, dhidden_pre);

  nn::Mat dw1_raw(c.w1_raw.rows(), c.w1_raw.cols());
  nn::Mat dq = nn::Mat::Zero(N, c.state.cols());
  for (int i = 0; i < N; ++i) {
    const auto rows = c.w1_raw.middleRows(static_cast<Eigen::Index>(i) * E, E);
    dw1_raw.middleRows(static_cast<Eigen::Index>(i) * E, E) =
        (dhidden_pre.array() * c.agent_qs.row(i).replicate(E, 1).array() * sign(rows).array()).matrix();
    dq.row(i) = (dhidden_pre.array() * rows.array().abs()).colwise().sum();
  }

  if (spec_.hypernet_layers == 2) {
    w1_a_.backward_params(store, c.state, nn::relu_backward(c.w1_pre, w1_b_.backward(store, nn::relu(c.w1_pre), dw1_raw)));
    w2_a_.backward_params(store, c.state, nn::relu_backward(c.w2_pre, w2_b_.backward(store, nn::relu(c.w2_pre), dw2_raw)));
  } else {
    w1_a_.backward_params(store, c.state, dw1_raw);
    w2_a_.backward_params(store, c.state, dw2_raw);
  }
  return dq;
}

}  // namespace cmarl::algos

#pragma once

#include <string>

#include "cmarl/nn/layers.hpp"

namespace cmarl::algos {

struct MixerSpec {
  int n_agents = 2;
  int state_dim = 1;
  int embed_dim = 32;       // mixing network hidden dimension
  int hypernet_dim = 64;    // hidden width of two-layer hypernetworks
  int hypernet_layers = 2;  // 1: linear hypernetworks for the mixing weights
};

/// Monotonic mixing network. State-conditioned hypernetworks produce
///   W1 = |hyper_w1(s)| (agents x embed),  b1 = hyper_b1(s),
///   w2 = |hyper_w2(s)| (embed),           v  = V(s) (Linear-ReLU-Linear),
/// and Q_tot = elu(q^T W1 + b1) . w2 + v. Non-negative mixing weights and a
/// monotone activation make Q_tot non-decreasing in every agent's q.
class QMixer {
 public:
  struct Cache {
    nn::Mat state;
    nn::Mat agent_qs;
    nn::Mat w1_pre, w1_raw;  // w1_pre: hidden pre-activation of a two-layer hypernet
    nn::Mat w2_pre, w2_raw;
    nn::Mat v_pre;
    nn::Mat hidden_pre;      // q^T W1 + b1, (embed x M)
  };

  QMixer() = default;
  QMixer(const MixerSpec& spec, nn::ParameterStore& store, const std::string& prefix);

  const MixerSpec& spec() const { return spec_; }
  void init(nn::ParameterStore& store, RngStream& rng) const;

  /// agent_qs: (n_agents x M), states: (state_dim x M). Returns (1 x M).
  nn::Mat forward(const nn::ParameterStore& store, const nn::Mat& agent_qs, const nn::Mat& states, Cache* cache) const;
  /// Accumulates mixer gradients and returns dL/dagent_qs.
  nn::Mat backward(nn::ParameterStore& store, const Cache& cache, const nn::Mat& dq_tot) const;

 private:
  MixerSpec spec_;
  nn::Linear w1_a_, w1_b_;  // w1_b_ unused with one hypernet layer
  nn::Linear w2_a_, w2_b_;
  nn::Linear b1_;
  nn::Linear v_a_, v_b_;
};

}  // namespace cmarl::algos

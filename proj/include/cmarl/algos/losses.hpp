#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cmarl/nn/params.hpp"

namespace cmarl::algos {

/// Welford-style running mean/variance merged batch by batch.
class RunningMeanStd {
 public:
  void update(std::span<const double> values);
  double mean() const { return mean_; }
  double var() const { return var_; }
  double count() const { return count_; }
  /// (x - mean) / sqrt(var), with var floored at 1e-8.
  double standardise(double x) const;

 private:
  double mean_ = 0.0;
  double var_ = 1.0;
  double count_ = 1e-4;
};

/// Truncation-aware n-step targets over a padded [B][T] grid.
///   G_t = sum_{k<m} gamma^k r_{t+k} + gamma^m V_{t+m},  m = min(n, L - t)
/// V_L (the value of the state after the last step) is used only when the
/// episode was truncated; after a terminal step the tail bootstrap is 0.
/// `values` is [B][T + 1]. Padded entries of the result are 0.
std::vector<double> nstep_targets(std::span<const double> rewards, std::span<const double> values,
                                  std::span<const std::uint8_t> terminated, std::span<const int> lengths, int max_len,
                                  double gamma, int n);

struct PolicyLoss {
  double loss = 0.0;        // surrogate - entropy_coef * entropy
  double surrogate = 0.0;   // policy-gradient term alone
  double entropy = 0.0;     // mean entropy over valid samples
  double clip_fraction = 0.0;
  nn::Mat dlogits;          // dloss/dlogits (actions x M)
};

/// -mean(mask * log pi(a) * A) - entropy_coef * mean(mask * H(pi)), means taken
/// over the valid (mask = 1) columns.
PolicyLoss actor_critic_policy_loss(const nn::Mat& logits, std::span<const int> actions,
                                    std::span<const double> advantages, std::span<const std::uint8_t> mask,
                                    double entropy_coef);

/// Clipped surrogate: -mean(min(rho A, clip(rho, 1 - eps, 1 + eps) A)) - entropy term,
/// rho = exp(log pi(a) - old_log_prob). The clipped branch passes no gradient.
PolicyLoss ppo_policy_loss(const nn::Mat& logits, std::span<const int> actions, std::span<const double> old_log_probs,
                           std::span<const double> advantages, std::span<const std::uint8_t> mask, double clip,
                           double entropy_coef);

struct ValueLoss {
  double loss = 0.0;
  std::vector<double> dvalues;
};

/// mean over valid entries of (v - target)^2.
ValueLoss value_mse(std::span<const double> values, std::span<const double> targets, std::span<const std::uint8_t> mask);

struct TdLoss {
  double loss = 0.0;
  std::vector<double> dq;          // dloss/dQ_tot
  std::vector<double> td_errors;   // Q_tot - y, zero on padding
};

/// 0.5 * sum(w_b * mask * (q - y)^2) / sum(mask); `weights` is per episode
/// (importance weights), `columns_per_episode` = T.
TdLoss td_loss(std::span<const double> q_tot, std::span<const double> targets, std::span<const std::uint8_t> mask,
               std::span<const double> weights, int columns_per_episode);

}  // namespace cmarl::algos

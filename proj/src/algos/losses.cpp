#include "cmarl/algos/losses.hpp"

#include <algorithm>
#include <cmath>

#include "cmarl/algos/policy.hpp"
#include "cmarl/core/errors.hpp"

namespace cmarl::algos {

void RunningMeanStd::update(std::span<const double> values) {
  if (values.empty()) return;
  double mean = 0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(values.size());
  const double n = static_cast<double>(values.size());
  const double delta = mean - mean_;
  const double total = count_ + n;
  const double m2 = var_ * count_ + var * n + delta * delta * count_ * n / total;
  mean_ += delta * n / total;
  var_ = m2 / total;
  count_ = total;
}

double RunningMeanStd::standardise(double x) const { return (x - mean_) / std::sqrt(std::max(var_, 1e-8)); }

std::vector<double> nstep_targets(std::span<const double> rewards, std::span<const double> values,
                                  std::span<const std::uint8_t> terminated, std::span<const int> lengths, int max_len,
                                  double gamma, int n) {
  const std::size_t B = lengths.size();
  const auto T = static_cast<std::size_t>(max_len);
  if (rewards.size() != B * T || values.size() != B * (T + 1) || terminated.size() != B * T) {
    raise(ErrorCode::DimMismatch, "n-step inputs have inconsistent shapes");
  }
  std::vector<double> out(B * T, 0.0);
  for (std::size_t b = 0; b < B; ++b) {
    const int L = lengths[b];
    const bool ended = L > 0 && terminated[b * T + static_cast<std::size_t>(L - 1)];
    for (int t = 0; t < L; ++t) {
      const int m = std::min(n, L - t);
      double g = 0, discount = 1;
      for (int k = 0; k < m; ++k) {
        g += discount * rewards[b * T + static_cast<std::size_t>(t + k)];
        discount *= gamma;
      }
      const int boot = t + m;
      if (boot < L || !ended) g += discount * values[b * (T + 1) + static_cast<std::size_t>(boot)];
      out[b * T + static_cast<std::size_t>(t)] = g;
    }
  }
  return out;
}

namespace {

double valid_count(std::span<const std::uint8_t> mask) {
  double n = 0;
  for (auto m : mask) n += m;
  return n;
}

void check_policy_shapes(const nn::Mat& logits, std::size_t actions, std::size_t adv, std::size_t mask) {
  const auto M = static_cast<std::size_t>(logits.cols());
  if (actions != M || adv != M || mask != M) raise(ErrorCode::DimMismatch, "policy loss inputs disagree on size");
}

// Adds the entropy bonus for column c (already scaled) and returns H.
double add_entropy_term(const nn::Mat& log_p, Eigen::Index c, double scale, nn::Mat& dlogits) {
  const auto lp = log_p.col(c).array();
  const auto p = lp.exp();
  const double h = -(p * lp).sum();
  // d(-H)/dz_k = p_k (log p_k + H)
  dlogits.col(c).array() += scale * (p * (lp + h));
  return h;
}

}  // namespace

PolicyLoss actor_critic_policy_loss(const nn::Mat& logits, std::span<const int> actions,
                                    std::span<const double> advantages, std::span<const std::uint8_t> mask,
                                    double entropy_coef) {
  check_policy_shapes(logits, actions.size(), advantages.size(), mask.size());
  PolicyLoss out;
  out.dlogits = nn::Mat::Zero(logits.rows(), logits.cols());
  const double n = valid_count(mask);
  if (n == 0) return out;
  const nn::Mat log_p = log_softmax_columns(logits);
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    if (!mask[static_cast<std::size_t>(c)]) continue;
    const int a = actions[static_cast<std::size_t>(c)];
    const double adv = advantages[static_cast<std::size_t>(c)];
    out.surrogate -= log_p(a, c) * adv / n;
    // d(-log p_a A)/dz = -A (onehot(a) - p)
    out.dlogits.col(c) += (adv / n) * log_p.col(c).array().exp().matrix();
    out.dlogits(a, c) -= adv / n;
    out.entropy += add_entropy_term(log_p, c, entropy_coef / n, out.dlogits) / n;
  }
  out.loss = out.surrogate - entropy_coef * out.entropy;
  return out;
}

PolicyLoss ppo_policy_loss(const nn::Mat& logits, std::span<const int> actions, std::span<const double> old_log_probs,
                           std::span<const double> advantages, std::span<const std::uint8_t> mask, double clip,
                           double entropy_coef) {
  check_policy_shapes(logits, actions.size(), advantages.size(), mask.size());
  if (old_log_probs.size() != actions.size()) raise(ErrorCode::DimMismatch, "old log-probs size");
  PolicyLoss out;
  out.dlogits = nn::Mat::Zero(logits.rows(), logits.cols());
  const double n = valid_count(mask);
  if (n == 0) return out;
  const nn::Mat log_p = log_softmax_columns(logits);
  double clipped = 0;
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const auto k = static_cast<std::size_t>(c);
    if (!mask[k]) continue;
    const int a = actions[k];
    const double adv = advantages[k];
    const double rho = std::exp(log_p(a, c) - old_log_probs[k]);
    const double unclipped = rho * adv;
    const double bounded = std::clamp(rho, 1.0 - clip, 1.0 + clip) * adv;
    const bool inside = rho > 1.0 - clip && rho < 1.0 + clip;
    out.surrogate -= std::min(unclipped, bounded) / n;
    if (unclipped <= bounded || inside) {
      // d(-rho A)/dz = -rho A (onehot(a) - p)
      out.dlogits.col(c) += (unclipped / n) * log_p.col(c).array().exp().matrix();
      out.dlogits(a, c) -= unclipped / n;
    } else {
      clipped += 1;
    }
    out.entropy += add_entropy_term(log_p, c, entropy_coef / n, out.dlogits) / n;
  }
  out.clip_fraction = clipped / n;
  out.loss = out.surrogate - entropy_coef * out.entropy;
  return out;
}

ValueLoss value_mse(std::span<const double> values, std::span<const double> targets, std::span<const std::uint8_t> mask) {
  if (values.size() != targets.size() || values.size() != mask.size()) raise(ErrorCode::DimMismatch, "value loss sizes");
  ValueLoss out;
  out.dvalues.assign(values.size(), 0.0);
  const double n = valid_count(mask);
  if (n == 0) return out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!mask[i]) continue;
    const double d = values[i] - targets[i];
    out.loss += d * d / n;
    out.dvalues[i] = 2 * d / n;
  }
  return out;
}

TdLoss td_loss(std::span<const double> q_tot, std::span<const double> targets, std::span<const std::uint8_t> mask,
               std::span<const double> weights, int columns_per_episode) {
  if (q_tot.size() != targets.size() || q_tot.size() != mask.size() ||
      weights.size() * static_cast<std::size_t>(columns_per_episode) != q_tot.size()) {
    raise(ErrorCode::DimMismatch, "td loss sizes");
  }
  TdLoss out;
  out.dq.assign(q_tot.size(), 0.0);
  out.td_errors.assign(q_tot.size(), 0.0);
  const double n = valid_count(mask);
  if (n == 0) return out;
  for (std::size_t i = 0; i < q_tot.size(); ++i) {
    if (!mask[i]) continue;
    const double w = weights[i / static_cast<std::size_t>(columns_per_episode)];
    const double d = q_tot[i] - targets[i];
    out.td_errors[i] = d;
    out.loss += 0.5 * w * d * d / n;
    out.dq[i] = w * d / n;
  }
  return out;
}

}  // namespace cmarl::algos

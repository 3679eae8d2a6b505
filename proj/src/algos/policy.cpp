#include "cmarl/algos/policy.hpp"

#include <algorithm>
#include <cmath>

namespace cmarl::algos {

double EpsilonSchedule::at(std::int64_t step) const {
  if (step >= anneal_steps) return finish;
  const double frac = static_cast<double>(std::max<std::int64_t>(step, 0)) / static_cast<double>(anneal_steps);
  return start + frac * (finish - start);
}

int argmax(std::span<const double> values) {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

int epsilon_greedy(std::span<const double> q_values, double epsilon, RngStream& rng) {
  if (rng.uniform() < epsilon) return static_cast<int>(rng.below(static_cast<std::uint32_t>(q_values.size())));
  return argmax(q_values);
}

void softmax(std::span<const double> logits, std::span<double> out) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) z += (out[i] = std::exp(logits[i] - m));
  for (double& p : out) p /= z;
}

double log_softmax_at(std::span<const double> logits, int index) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0;
  for (double l : logits) z += std::exp(l - m);
  return logits[static_cast<std::size_t>(index)] - m - std::log(z);
}

int sample_softmax(std::span<const double> logits, RngStream& rng) {
  std::vector<double> p(logits.size());
  softmax(logits, p);
  const double u = rng.uniform();
  double acc = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return static_cast<int>(i);
  }
  // Rounding left u above the accumulated mass; take the last action with mass.
  for (std::size_t i = p.size(); i-- > 0;) {
    if (p[i] > 0) return static_cast<int>(i);
  }
  return 0;
}

nn::Mat log_softmax_columns(const nn::Mat& logits) {
  nn::Mat out = logits;
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const double m = logits.col(c).maxCoeff();
    const double lse = m + std::log((logits.col(c).array() - m).exp().sum());
    out.col(c).array() -= lse;
  }
  return out;
}

nn::Mat softmax_columns(const nn::Mat& logits) { return log_softmax_columns(logits).array().exp().matrix(); }

}  // namespace cmarl::algos

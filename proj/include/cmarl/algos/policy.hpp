#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cmarl/core/rng.hpp"
#include "cmarl/nn/params.hpp"

namespace cmarl::algos {

/// Linear epsilon decay, constant after `anneal_steps`.
struct EpsilonSchedule {
  double start = 1.0;
  double finish = 0.05;
  std::int64_t anneal_steps = 50000;
  double evaluation = 0.0;

  double at(std::int64_t step) const;
  double at(std::int64_t step, bool evaluation_mode) const { return evaluation_mode ? evaluation : at(step); }
};

/// Lowest index among the maxima.
int argmax(std::span<const double> values);

/// With probability epsilon a uniform action, otherwise the greedy one.
/// Draws one uniform per call and one bounded integer when exploring.
int epsilon_greedy(std::span<const double> q_values, double epsilon, RngStream& rng);

void softmax(std::span<const double> logits, std::span<double> out);
double log_softmax_at(std::span<const double> logits, int index);

/// Inverse-CDF categorical draw from softmax(logits) with one uniform.
int sample_softmax(std::span<const double> logits, RngStream& rng);

/// Column-wise softmax / log-softmax of a logits matrix.
nn::Mat softmax_columns(const nn::Mat& logits);
nn::Mat log_softmax_columns(const nn::Mat& logits);

}  // namespace cmarl::algos

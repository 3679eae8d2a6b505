#pragma once

#include "cmarl/nn/params.hpp"

namespace cmarl::nn {

struct AdamConfig {
  double lr = 0.0005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction:
///   m = b1 m + (1-b1) g,  v = b2 v + (1-b2) g^2
///   p -= lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
class Adam {
 public:
  explicit Adam(const ParameterStore& store, AdamConfig config = {});
  void step(ParameterStore& store);
  long steps() const { return t_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  ColVec m_, v_;
  long t_ = 0;
};

struct RmsPropConfig {
  double lr = 0.0005;
  double decay = 0.99;
  double eps = 1e-5;
};

/// v = decay v + (1-decay) g^2;  p -= lr g / (sqrt(v) + eps)
class RmsProp {
 public:
  explicit RmsProp(const ParameterStore& store, RmsPropConfig config = {});
  void step(ParameterStore& store);
  const RmsPropConfig& config() const { return config_; }

 private:
  RmsPropConfig config_;
  ColVec v_;
};

}  // namespace cmarl::nn

#include "cmarl/nn/optim.hpp"

#include <cmath>

#include "cmarl/core/errors.hpp"

namespace cmarl::nn {

namespace {

void expect_size(const ParameterStore& store, const ColVec& moments) {
  if (static_cast<std::size_t>(moments.size()) != store.size()) {
    raise(ErrorCode::DimMismatch, "optimizer state does not match the parameter store");
  }
}

}  // namespace

Adam::Adam(const ParameterStore& store, AdamConfig config)
    : config_(config),
      m_(ColVec::Zero(static_cast<Eigen::Index>(store.size()))),
      v_(ColVec::Zero(static_cast<Eigen::Index>(store.size()))) {}

void Adam::step(ParameterStore& store) {
  expect_size(store, m_);
  ++t_;
  const ColVec& g = store.grads();
  m_ = config_.beta1 * m_ + (1.0 - config_.beta1) * g;
  v_ = config_.beta2 * v_ + (1.0 - config_.beta2) * g.cwiseProduct(g);
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  store.values().array() -= config_.lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + config_.eps);
  store.touch();
}

RmsProp::RmsProp(const ParameterStore& store, RmsPropConfig config)
    : config_(config), v_(ColVec::Zero(static_cast<Eigen::Index>(store.size()))) {}

void RmsProp::step(ParameterStore& store) {
  expect_size(store, v_);
  const ColVec& g = store.grads();
  v_ = config_.decay * v_ + (1.0 - config_.decay) * g.cwiseProduct(g);
  store.values().array() -= config_.lr * g.array() / (v_.array().sqrt() + config_.eps);
  store.touch();
}

}  // namespace cmarl::nn

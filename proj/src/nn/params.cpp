#include "cmarl/nn/params.hpp"

#include <cmath>

#include "cmarl/core/errors.hpp"

namespace cmarl::nn {

std::size_t ParameterStore::add(std::string name, int rows, int cols) {
  if (rows < 1 || cols < 1) raise(ErrorCode::DimMismatch, "tensor '" + name + "' has an empty shape");
  TensorView v{std::move(name), size(), rows, cols};
  const auto grown = static_cast<Eigen::Index>(size() + v.size());
  values_.conservativeResize(grown);
  grads_.conservativeResize(grown);
  values_.tail(static_cast<Eigen::Index>(v.size())).setZero();
  grads_.tail(static_cast<Eigen::Index>(v.size())).setZero();
  views_.push_back(std::move(v));
  ++version_;
  return views_.size() - 1;
}

Eigen::Map<const Mat> ParameterStore::value(std::size_t id) const {
  const TensorView& v = views_.at(id);
  return {values_.data() + v.offset, v.rows, v.cols};
}

Eigen::Map<Mat> ParameterStore::value(std::size_t id) {
  const TensorView& v = views_.at(id);
  return {values_.data() + v.offset, v.rows, v.cols};
}

Eigen::Map<Mat> ParameterStore::grad(std::size_t id) {
  const TensorView& v = views_.at(id);
  return {grads_.data() + v.offset, v.rows, v.cols};
}

Eigen::Map<const Mat> ParameterStore::grad(std::size_t id) const {
  const TensorView& v = views_.at(id);
  return {grads_.data() + v.offset, v.rows, v.cols};
}

double ParameterStore::clip_grad_norm(double max_norm) {
  const double norm = grads_.norm();
  if (norm > max_norm && norm > 0.0) grads_ *= max_norm / norm;
  return norm;
}

bool ParameterStore::same_layout(const ParameterStore& other) const {
  if (views_.size() != other.views_.size()) return false;
  for (std::size_t i = 0; i < views_.size(); ++i) {
    const TensorView& a = views_[i];
    const TensorView& b = other.views_[i];
    if (a.offset != b.offset || a.rows != b.rows || a.cols != b.cols) return false;
  }
  return true;
}

void ParameterStore::copy_values_from(const ParameterStore& other) {
  if (!same_layout(other)) raise(ErrorCode::DimMismatch, "parameter layouts differ");
  values_ = other.values_;
  ++version_;
}

void init_uniform_fan_in(ParameterStore& store, std::size_t id, int fan_in, RngStream& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  auto w = store.value(id);
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = rng.uniform(-bound, bound);
  }
  store.touch();
}

}  // namespace cmarl::nn

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "cmarl/core/errors.hpp"
#include "cmarl/core/rng.hpp"

namespace cmarl::nn {

using Mat = Eigen::MatrixXd;  // columns are samples throughout
using ColVec = Eigen::VectorXd;

struct TensorView {
  std::string name;
  std::size_t offset = 0;
  int rows = 0;
  int cols = 0;
  std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
};

/// Flat vector of every learnable value with a paired gradient vector.
/// Tensors are column-major views into the flat storage. Register all
/// tensors before taking views; `add` may reallocate.
class ParameterStore {
 public:
  std::size_t add(std::string name, int rows, int cols);

  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  std::size_t tensor_count() const { return views_.size(); }
  const TensorView& view(std::size_t id) const { return views_[id]; }
  const std::vector<TensorView>& views() const { return views_; }

  Eigen::Map<const Mat> value(std::size_t id) const;
  Eigen::Map<Mat> value(std::size_t id);
  Eigen::Map<Mat> grad(std::size_t id);
  Eigen::Map<const Mat> grad(std::size_t id) const;

  ColVec& values() { return values_; }
  const ColVec& values() const { return values_; }
  ColVec& grads() { return grads_; }
  const ColVec& grads() const { return grads_; }

  void zero_grad() { grads_.setZero(); }
  /// Rescales the gradient so its L2 norm is at most `max_norm`; returns the norm before clipping.
  double clip_grad_norm(double max_norm);

  /// Bumped on every in-place parameter change; tapes compare against it.
  std::uint64_t version() const { return version_; }
  void touch() { ++version_; }

  /// Copies values from a store with the same layout.
  void copy_values_from(const ParameterStore& other);
  bool same_layout(const ParameterStore& other) const;

 private:
  std::vector<TensorView> views_;
  ColVec values_;
  ColVec grads_;
  std::uint64_t version_ = 0;
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for a weight and its bias.
void init_uniform_fan_in(ParameterStore& store, std::size_t id, int fan_in, RngStream& rng);

}  // namespace cmarl::nn

#pragma once

#include <string>

#include "cmarl/nn/params.hpp"

namespace cmarl::nn {

/// y = W x + b, applied column-wise.
class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore& store, const std::string& name, int in, int out);

  int in() const { return in_; }
  int out() const { return out_; }
  std::size_t weight_id() const { return w_; }
  std::size_t bias_id() const { return b_; }

  void init(ParameterStore& store, RngStream& rng) const;
  Mat forward(const ParameterStore& store, const Mat& x) const;
  /// Accumulates dW, db into the store's gradient and returns dL/dx.
  Mat backward(ParameterStore& store, const Mat& x, const Mat& dy) const;
  /// Parameter gradients only, for inputs that need no gradient.
  void backward_params(ParameterStore& store, const Mat& x, const Mat& dy) const;

 private:
  int in_ = 0;
  int out_ = 0;
  std::size_t w_ = 0;
  std::size_t b_ = 0;
};

Mat relu(const Mat& x);
/// dy masked by the sign of the pre-activation.
Mat relu_backward(const Mat& pre, const Mat& dy);

struct GruCache {
  Mat x, h, r, z, n, hn;  // hn = W_hn h + b_hn
};

/// Three-gate GRU:
///   r = sigma(W_ir x + b_ir + W_hr h + b_hr)
///   z = sigma(W_iz x + b_iz + W_hz h + b_hz)
///   n = tanh(W_in x + b_in + r * (W_hn h + b_hn))
///   h' = (1 - z) * n + z * h
/// Gate rows are stacked in the order r, z, n.
class GruCell {
 public:
  GruCell() = default;
  GruCell(ParameterStore& store, const std::string& name, int in, int hidden);

  int in() const { return in_; }
  int hidden() const { return hidden_; }

  void init(ParameterStore& store, RngStream& rng) const;
  Mat forward(const ParameterStore& store, const Mat& x, const Mat& h, GruCache* cache) const;
  /// Given dL/dh', accumulates parameter gradients and writes dL/dx, dL/dh.
  void backward(ParameterStore& store, const GruCache& cache, const Mat& dh_next, Mat& dx, Mat& dh) const;

 private:
  int in_ = 0;
  int hidden_ = 0;
  std::size_t w_ih_ = 0, w_hh_ = 0, b_ih_ = 0, b_hh_ = 0;
};

}  // namespace cmarl::nn

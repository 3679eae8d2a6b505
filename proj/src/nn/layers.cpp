#include "cmarl/nn/layers.hpp"

#include "cmarl/core/errors.hpp"

namespace cmarl::nn {

namespace {

void expect_rows(const Mat& m, int rows, const char* what) {
  if (m.rows() != rows) {
    raise(ErrorCode::DimMismatch, std::string(what) + ": expected " + std::to_string(rows) + " rows, got " +
                                      std::to_string(m.rows()));
  }
}

Mat sigmoid(const Mat& x) { return (1.0 + (-x.array()).exp()).inverse().matrix(); }

}  // namespace

Linear::Linear(ParameterStore& store, const std::string& name, int in, int out) : in_(in), out_(out) {
  w_ = store.add(name + ".weight", out, in);
  b_ = store.add(name + ".bias", out, 1);
}

void Linear::init(ParameterStore& store, RngStream& rng) const {
  init_uniform_fan_in(store, w_, in_, rng);
  init_uniform_fan_in(store, b_, in_, rng);
}

Mat Linear::forward(const ParameterStore& store, const Mat& x) const {
  expect_rows(x, in_, "linear input");
  Mat y = store.value(w_) * x;
  y.colwise() += store.value(b_).col(0);
  return y;
}

void Linear::backward_params(ParameterStore& store, const Mat& x, const Mat& dy) const {
  expect_rows(dy, out_, "linear output gradient");
  store.grad(w_).noalias() += dy * x.transpose();
  store.grad(b_).col(0) += dy.rowwise().sum();
}

Mat Linear::backward(ParameterStore& store, const Mat& x, const Mat& dy) const {
  backward_params(store, x, dy);
  return store.value(w_).transpose() * dy;
}

Mat relu(const Mat& x) { return x.cwiseMax(0.0); }

Mat relu_backward(const Mat& pre, const Mat& dy) { return (pre.array() > 0.0).select(dy, 0.0); }

GruCell::GruCell(ParameterStore& store, const std::string& name, int in, int hidden) : in_(in), hidden_(hidden) {
  w_ih_ = store.add(name + ".weight_ih", 3 * hidden, in);
  w_hh_ = store.add(name + ".weight_hh", 3 * hidden, hidden);
  b_ih_ = store.add(name + ".bias_ih", 3 * hidden, 1);
  b_hh_ = store.add(name + ".bias_hh", 3 * hidden, 1);
}

void GruCell::init(ParameterStore& store, RngStream& rng) const {
  for (std::size_t id : {w_ih_, w_hh_, b_ih_, b_hh_}) init_uniform_fan_in(store, id, hidden_, rng);
}

Mat GruCell::forward(const ParameterStore& store, const Mat& x, const Mat& h, GruCache* cache) const {
  expect_rows(x, in_, "gru input");
  expect_rows(h, hidden_, "gru hidden");
  if (x.cols() != h.cols()) raise(ErrorCode::DimMismatch, "gru input and hidden batch sizes differ");
  const int H = hidden_;
  Mat gi = store.value(w_ih_) * x;
  gi.colwise() += store.value(b_ih_).col(0);
  Mat gh = store.value(w_hh_) * h;
  gh.colwise() += store.value(b_hh_).col(0);
  Mat r = sigmoid(gi.topRows(H) + gh.topRows(H));
  Mat z = sigmoid(gi.middleRows(H, H) + gh.middleRows(H, H));
  Mat hn = gh.bottomRows(H);
  Mat n = (gi.bottomRows(H).array() + r.array() * hn.array()).tanh().matrix();
  Mat out = ((1.0 - z.array()) * n.array() + z.array() * h.array()).matrix();
  if (cache) {
    cache->x = x;
    cache->h = h;
    cache->r = std::move(r);
    cache->z = std::move(z);
    cache->n = std::move(n);
    cache->hn = std::move(hn);
  }
  return out;
}

void GruCell::backward(ParameterStore& store, const GruCache& c, const Mat& dh_next, Mat& dx, Mat& dh) const {
  expect_rows(dh_next, hidden_, "gru output gradient");
  const int H = hidden_;
  const auto B = dh_next.cols();
  const auto dn = (dh_next.array() * (1.0 - c.z.array())).eval();
  const auto dz = (dh_next.array() * (c.h.array() - c.n.array())).eval();
  const auto dan = (dn * (1.0 - c.n.array().square())).eval();
  const auto dr = (dan * c.hn.array()).eval();

  Mat dgi(3 * H, B);
  dgi.topRows(H) = (dr * c.r.array() * (1.0 - c.r.array())).matrix();
  dgi.middleRows(H, H) = (dz * c.z.array() * (1.0 - c.z.array())).matrix();
  dgi.bottomRows(H) = dan.matrix();
  Mat dgh = dgi;
  dgh.bottomRows(H) = (dan * c.r.array()).matrix();

  store.grad(w_ih_).noalias() += dgi * c.x.transpose();
  store.grad(b_ih_).col(0) += dgi.rowwise().sum();
  store.grad(w_hh_).noalias() += dgh * c.h.transpose();
  store.grad(b_hh_).col(0) += dgh.rowwise().sum();
  dx = store.value(w_ih_).transpose() * dgi;
  dh = (dh_next.array() * c.z.array()).matrix();
  dh.noalias() += store.value(w_hh_).transpose() * dgh;
}

}  // namespace cmarl::nn

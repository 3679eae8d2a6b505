#include "cmarl/nn/network.hpp"

#include "cmarl/core/errors.hpp"

namespace cmarl::nn {

void NetSpec::validate() const {
  if (input_dim < 1 || hidden_dim < 1 || output_dim < 1) raise(ErrorCode::DimMismatch, "network dims must be >= 1");
}

Network::Network(const NetSpec& spec, ParameterStore& store, const std::string& prefix) : spec_(spec) {
  spec.validate();
  fc1_ = Linear(store, prefix + ".fc1", spec.input_dim, spec.hidden_dim);
  if (recurrent()) {
    gru_ = GruCell(store, prefix + ".rnn", spec.hidden_dim, spec.hidden_dim);
    fc2_ = Linear(store, prefix + ".fc2", spec.hidden_dim, spec.output_dim);
  } else {
    fc2_ = Linear(store, prefix + ".fc2", spec.hidden_dim, spec.hidden_dim);
    fc3_ = Linear(store, prefix + ".fc3", spec.hidden_dim, spec.output_dim);
  }
}

void Network::init(ParameterStore& store, RngStream& rng) const {
  fc1_.init(store, rng);
  if (recurrent()) {
    gru_.init(store, rng);
    fc2_.init(store, rng);
  } else {
    fc2_.init(store, rng);
    fc3_.init(store, rng);
  }
}

Mat Network::forward(const ParameterStore& store, const Mat& input, const Mat* hidden_in, Mat* hidden_out,
                     Tape* tape) const {
  Mat pre1 = fc1_.forward(store, input);
  if (recurrent()) {
    if (!hidden_in || !hidden_out) raise(ErrorCode::DimMismatch, "recurrent network needs hidden state");
    Mat h = gru_.forward(store, relu(pre1), *hidden_in, tape ? &tape->gru : nullptr);
    Mat out = fc2_.forward(store, h);
    if (tape) {
      tape->hidden_in = *hidden_in;
      tape->hidden_out = h;
    }
    *hidden_out = std::move(h);
    if (tape) {
      tape->version = store.version();
      tape->recorded = true;
      tape->input = input;
      tape->pre1 = std::move(pre1);
    }
    return out;
  }
  Mat pre2 = fc2_.forward(store, relu(pre1));
  Mat out = fc3_.forward(store, relu(pre2));
  if (tape) {
    tape->version = store.version();
    tape->recorded = true;
    tape->input = input;
    tape->pre1 = std::move(pre1);
    tape->pre2 = std::move(pre2);
  }
  return out;
}

Mat Network::backward(ParameterStore& store, const Tape& tape, const Mat& doutput, const Mat* dhidden_out,
                      Mat* dhidden_in) const {
  if (!tape.recorded || tape.version != store.version()) {
    raise(ErrorCode::StaleTape, "tape was recorded against different parameters");
  }
  if (doutput.rows() != spec_.output_dim || doutput.cols() != tape.input.cols()) {
    raise(ErrorCode::DimMismatch, "output gradient shape does not match the tape");
  }
  if (recurrent()) {
    Mat dh = fc2_.backward(store, tape.hidden_out, doutput);
    if (dhidden_out) dh += *dhidden_out;
    Mat dx, dprev;
    gru_.backward(store, tape.gru, dh, dx, dprev);
    if (dhidden_in) *dhidden_in = std::move(dprev);
    return fc1_.backward(store, tape.input, relu_backward(tape.pre1, dx));
  }
  Mat d2 = relu_backward(tape.pre2, fc3_.backward(store, relu(tape.pre2), doutput));
  Mat d1 = relu_backward(tape.pre1, fc2_.backward(store, relu(tape.pre1), d2));
  return fc1_.backward(store, tape.input, d1);
}

}  // namespace cmarl::nn

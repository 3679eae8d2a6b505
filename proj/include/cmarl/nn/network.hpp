#pragma once

#include <cstdint>
#include <string>

#include "cmarl/nn/layers.hpp"

namespace cmarl::nn {

enum class CellType : int { Feedforward = 0, Recurrent = 1 };

struct NetSpec {
  int input_dim = 1;
  int hidden_dim = 64;
  int output_dim = 1;
  CellType cell = CellType::Feedforward;

  void validate() const;
  bool operator==(const NetSpec&) const = default;
};

/// Record of one forward pass. Valid for a single backward call against the
/// parameter version it was recorded with.
struct Tape {
  std::uint64_t version = 0;
  bool recorded = false;
  Mat input;
  Mat pre1, pre2;  // pre-activations of the rectified layers
  Mat hidden_in, hidden_out;
  GruCache gru;
};

/// Feedforward: Linear-ReLU-Linear-ReLU-Linear.
/// Recurrent:   Linear-ReLU-GRU-Linear, the GRU state being the hidden state.
/// The network owns only tensor ids, so one instance serves every store
/// built with the same registration sequence (online and target copies).
class Network {
 public:
  Network() = default;
  Network(const NetSpec& spec, ParameterStore& store, const std::string& prefix);

  const NetSpec& spec() const { return spec_; }
  bool recurrent() const { return spec_.cell == CellType::Recurrent; }

  void init(ParameterStore& store, RngStream& rng) const;
  Mat initial_hidden(Eigen::Index batch) const { return Mat::Zero(spec_.hidden_dim, batch); }

  /// `hidden_in`/`hidden_out` are required for recurrent networks and ignored otherwise.
  Mat forward(const ParameterStore& store, const Mat& input, const Mat* hidden_in, Mat* hidden_out,
              Tape* tape) const;

  /// Accumulates parameter gradients. `dhidden_out` is the gradient flowing
  /// into this step's hidden output from later steps (may be null). Writes
  /// the hidden-input gradient when `dhidden_in` is non-null. Returns dL/dinput.
  Mat backward(ParameterStore& store, const Tape& tape, const Mat& doutput, const Mat* dhidden_out,
               Mat* dhidden_in) const;

 private:
  NetSpec spec_;
  Linear fc1_, fc2_, fc3_;
  GruCell gru_;
};

}  // namespace cmarl::nn

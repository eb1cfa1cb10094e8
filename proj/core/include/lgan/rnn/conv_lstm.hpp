#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "lgan/core/graph.hpp"

namespace lgan::rnn {

/// Geometry of a ConvLSTM layer: spatial grid, channels, kernel extent.
struct ConvLstmShape {
  std::size_t height = 1;
  std::size_t width = 1;
  std::size_t input_channels = 1;
  std::size_t hidden_channels = 1;
  std::size_t kernel_h = 1;
  std::size_t kernel_w = 1;
};

/// ConvLSTM weights. Input kernels are `[kh,kw,Cin,Ch]`, hidden kernels
/// `[kh,kw,Ch,Ch]`, peepholes `[H,W,Ch]` (Hadamard with the cell state) and
/// biases `[Ch]`. All convolutions use same-padding and stride 1.
struct ConvLstmParams {
  core::Parameter w_xi, w_hi, w_xf, w_hf, w_xc, w_hc, w_xo, w_ho;
  core::Parameter w_ci, w_cf, w_co;
  core::Parameter b_i, b_f, b_c, b_o;

  static ConvLstmParams zeros(const ConvLstmShape& shape);
  static ConvLstmParams uniform(const ConvLstmShape& shape, double bound, std::mt19937_64& rng);

  ConvLstmShape shape() const;
  std::vector<core::Parameter*> parameters();
  std::vector<const core::Parameter*> parameters() const;
  void validate() const;
};

struct ConvLstmState {
  core::Tensor h;
  core::Tensor c;
};

/// Zero `[H,W,Ch]` state, or `[N,H,W,Ch]` when batch > 0.
ConvLstmState conv_lstm_zero_state(const ConvLstmShape& shape, std::size_t batch = 0);

struct ConvLstmGates {
  core::Var input, forget, candidate, output;
};

class ConvLstmCell {
 public:
  struct State {
    core::Var h;
    core::Var c;
  };

  ConvLstmCell(core::Graph& graph, ConvLstmParams& params, bool trainable = true);
  ConvLstmCell(core::Graph& graph, const ConvLstmParams& params);

  /// i = s(Wxi*x + Whi*h + Wci.C_prev + bi), f = s(Wxf*x + Whf*h + Wcf.C_prev + bf),
  /// C~ = tanh(Wxc*x + Whc*h + bc), C = f.C_prev + i.C~, o = s(Wxo*x + Who*h + Wco.C + bo),
  /// H = o.tanh(C).
  State step(core::Var x, State prev, ConvLstmGates* gates = nullptr);
  State constant_state(const ConvLstmState& s);
  const ConvLstmShape& shape() const noexcept { return shape_; }
  core::Graph& graph() { return graph_; }

 private:
  template <class P, class Bind>
  void bind_all(P& params, Bind bind);

  core::Graph& graph_;
  ConvLstmShape shape_;
  core::Var wx_, wh_, b_, w_ci_, w_cf_, w_co_;
};

ConvLstmState conv_lstm_step(const ConvLstmParams& params, const core::Tensor& x, const ConvLstmState& prev);

}  // namespace lgan::rnn

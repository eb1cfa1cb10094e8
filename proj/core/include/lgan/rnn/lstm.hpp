#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "lgan/core/graph.hpp"

namespace lgan::rnn {

/// Weights of a fully connected LSTM cell. Inputs are row vectors, so
/// input-facing weights are `[in, hidden]`, hidden-facing `[hidden, hidden]`
/// and biases `[hidden]`.
struct LstmParams {
  core::Parameter w_xi, w_hi, w_xf, w_hf, w_xc, w_hc, w_xo, w_ho;
  core::Parameter b_i, b_f, b_c, b_o;

  static LstmParams zeros(std::size_t input_width, std::size_t hidden_width);
  static LstmParams uniform(std::size_t input_width, std::size_t hidden_width, double bound, std::mt19937_64& rng);

  std::size_t input_width() const { return w_xi.value.dim(0); }
  std::size_t hidden_width() const { return w_hi.value.dim(0); }

  std::vector<core::Parameter*> parameters();
  std::vector<const core::Parameter*> parameters() const;
  void validate() const;
};

struct LstmState {
  core::Tensor h;
  core::Tensor c;
};

/// Zero state for a batch of `batch` rows (batch == 0 gives unbatched `[hidden]` tensors).
LstmState lstm_zero_state(std::size_t hidden_width, std::size_t batch = 0);

/// Gate activations of one step, exposed for inspection.
struct LstmGates {
  core::Var input, forget, candidate, output;
};

/// LSTM cell bound to a graph. The cell reads its weights from the graph
/// leaves created at construction, so one cell can be stepped many times.
class LstmCell {
 public:
  struct State {
    core::Var h;
    core::Var c;
  };

  /// `trainable == false` binds the weights as constants (no parameter gradients).
  LstmCell(core::Graph& graph, LstmParams& params, bool trainable = true);
  /// Weights bound as constants.
  LstmCell(core::Graph& graph, const LstmParams& params);

  State step(core::Var x, State prev, LstmGates* gates = nullptr);
  State constant_state(const LstmState& s);
  core::Graph& graph() { return graph_; }

 private:
  core::Graph& graph_;
  std::size_t hidden_;
  core::Var wx_, wh_, b_;
};

/// f = s(Wxf x + Whf h + bf), i = s(Wxi x + Whi h + bi), c~ = tanh(Wxc x + Whc h + bc),
/// c = f*c_prev + i*c~, o = s(Wxo x + Who h + bo), h = o*tanh(c).
LstmState lstm_step(const LstmParams& params, const core::Tensor& x, const LstmState& prev);

}  // namespace lgan::rnn

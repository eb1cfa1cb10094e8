#include "lgan/rnn/lstm.hpp"

#include "lgan/core/params.hpp"
#include "lgan/error.hpp"

namespace lgan::rnn {

using core::Parameter;
using core::Tensor;
using core::Var;

LstmParams LstmParams::zeros(std::size_t input_width, std::size_t hidden_width) {
  if (input_width == 0 || hidden_width == 0) throw ContractError("LSTM widths must be positive");
  LstmParams p;
  const core::Shape xs{input_width, hidden_width};
  const core::Shape hs{hidden_width, hidden_width};
  const core::Shape bs{hidden_width};
  p.w_xi = Parameter("w_xi", Tensor(xs));
  p.w_hi = Parameter("w_hi", Tensor(hs));
  p.w_xf = Parameter("w_xf", Tensor(xs));
  p.w_hf = Parameter("w_hf", Tensor(hs));
  p.w_xc = Parameter("w_xc", Tensor(xs));
  p.w_hc = Parameter("w_hc", Tensor(hs));
  p.w_xo = Parameter("w_xo", Tensor(xs));
  p.w_ho = Parameter("w_ho", Tensor(hs));
  p.b_i = Parameter("b_i", Tensor(bs));
  p.b_f = Parameter("b_f", Tensor(bs));
  p.b_c = Parameter("b_c", Tensor(bs));
  p.b_o = Parameter("b_o", Tensor(bs));
  return p;
}

LstmParams LstmParams::uniform(std::size_t input_width, std::size_t hidden_width, double bound,
                               std::mt19937_64& rng) {
  LstmParams p = zeros(input_width, hidden_width);
  for (Parameter* q : p.parameters()) core::init_uniform(q->value, bound, rng);
  return p;
}

std::vector<Parameter*> LstmParams::parameters() {
  return {&w_xi, &w_hi, &w_xf, &w_hf, &w_xc, &w_hc, &w_xo, &w_ho, &b_i, &b_f, &b_c, &b_o};
}

std::vector<const Parameter*> LstmParams::parameters() const {
  return {&w_xi, &w_hi, &w_xf, &w_hf, &w_xc, &w_hc, &w_xo, &w_ho, &b_i, &b_f, &b_c, &b_o};
}

void LstmParams::validate() const {
  const std::size_t in = w_xi.value.rank() == 2 ? w_xi.value.dim(0) : 0;
  const std::size_t hid = w_hi.value.rank() == 2 ? w_hi.value.dim(0) : 0;
  const core::Shape xs{in, hid}, hs{hid, hid}, bs{hid};
  for (const Parameter* w : {&w_xi, &w_xf, &w_xc, &w_xo}) {
    if (w->value.shape() != xs) throw DimensionError("LSTM input weight '" + w->name + "' must be " + core::shape_string(xs));
  }
  for (const Parameter* w : {&w_hi, &w_hf, &w_hc, &w_ho}) {
    if (w->value.shape() != hs) throw DimensionError("LSTM hidden weight '" + w->name + "' must be " + core::shape_string(hs));
  }
  for (const Parameter* b : {&b_i, &b_f, &b_c, &b_o}) {
    if (b->value.shape() != bs) throw DimensionError("LSTM bias '" + b->name + "' must be " + core::shape_string(bs));
  }
}

LstmState lstm_zero_state(std::size_t hidden_width, std::size_t batch) {
  const core::Shape s = batch == 0 ? core::Shape{hidden_width} : core::Shape{batch, hidden_width};
  return {Tensor(s), Tensor(s)};
}

LstmCell::LstmCell(core::Graph& graph, const LstmParams& params) : graph_(graph), hidden_(params.hidden_width()) {
  params.validate();
  auto bind = [&](const Parameter& p) { return graph_.constant(p.value); };
  const Var x_parts[] = {bind(params.w_xi), bind(params.w_xf), bind(params.w_xc), bind(params.w_xo)};
  const Var h_parts[] = {bind(params.w_hi), bind(params.w_hf), bind(params.w_hc), bind(params.w_ho)};
  const Var b_parts[] = {bind(params.b_i), bind(params.b_f), bind(params.b_c), bind(params.b_o)};
  wx_ = graph_.concat(x_parts);
  wh_ = graph_.concat(h_parts);
  b_ = graph_.concat(b_parts);
}

LstmCell::LstmCell(core::Graph& graph, LstmParams& params, bool trainable)
    : graph_(graph), hidden_(params.hidden_width()) {
  params.validate();
  auto bind = [&](Parameter& p) { return trainable ? graph_.parameter(p) : graph_.constant(p.value); };
  const Var x_parts[] = {bind(params.w_xi), bind(params.w_xf), bind(params.w_xc), bind(params.w_xo)};
  const Var h_parts[] = {bind(params.w_hi), bind(params.w_hf), bind(params.w_hc), bind(params.w_ho)};
  const Var b_parts[] = {bind(params.b_i), bind(params.b_f), bind(params.b_c), bind(params.b_o)};
  wx_ = graph_.concat(x_parts);
  wh_ = graph_.concat(h_parts);
  b_ = graph_.concat(b_parts);
}

LstmCell::State LstmCell::constant_state(const LstmState& s) {
  return {graph_.constant(s.h), graph_.constant(s.c)};
}

LstmCell::State LstmCell::step(Var x, State prev, LstmGates* gates) {
  auto& g = graph_;
  if (g.value(prev.h).shape() != g.value(prev.c).shape()) throw DimensionError("LSTM h and c shapes differ");
  if (g.value(x).shape().back() != g.value(wx_).dim(0)) {
    throw DimensionError("LSTM input width " + std::to_string(g.value(x).shape().back()) + " does not match weights " +
                         std::to_string(g.value(wx_).dim(0)));
  }
  if (g.value(prev.h).shape().back() != hidden_) throw DimensionError("LSTM state width does not match weights");

  const Var z = g.broadcast_add(g.add(g.matmul(x, wx_), g.matmul(prev.h, wh_)), b_);
  const Var i = g.sigmoid(g.slice(z, 0, hidden_));
  const Var f = g.sigmoid(g.slice(z, hidden_, hidden_));
  const Var cand = g.tanh(g.slice(z, 2 * hidden_, hidden_));
  const Var o = g.sigmoid(g.slice(z, 3 * hidden_, hidden_));
  const Var c = g.add(g.mul(f, prev.c), g.mul(i, cand));
  const Var h = g.mul(o, g.tanh(c));
  if (gates) *gates = {i, f, cand, o};
  return {h, c};
}

LstmState lstm_step(const LstmParams& params, const Tensor& x, const LstmState& prev) {
  core::Graph g;
  LstmCell cell(g, params);
  const auto next = cell.step(g.constant(x), cell.constant_state(prev));
  return {g.value(next.h), g.value(next.c)};
}

}  // namespace lgan::rnn

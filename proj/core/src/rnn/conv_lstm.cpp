#include "lgan/rnn/conv_lstm.hpp"

#include "lgan/core/params.hpp"
#include "lgan/error.hpp"

namespace lgan::rnn {

using core::Parameter;
using core::Shape;
using core::Tensor;
using core::Var;

ConvLstmParams ConvLstmParams::zeros(const ConvLstmShape& s) {
  if (s.height == 0 || s.width == 0 || s.input_channels == 0 || s.hidden_channels == 0 || s.kernel_h == 0 ||
      s.kernel_w == 0) {
    throw ContractError("ConvLSTM dimensions must be positive");
  }
  ConvLstmParams p;
  const Shape xs{s.kernel_h, s.kernel_w, s.input_channels, s.hidden_channels};
  const Shape hs{s.kernel_h, s.kernel_w, s.hidden_channels, s.hidden_channels};
  const Shape ps{s.height, s.width, s.hidden_channels};
  const Shape bs{s.hidden_channels};
  p.w_xi = Parameter("w_xi", Tensor(xs));
  p.w_hi = Parameter("w_hi", Tensor(hs));
  p.w_xf = Parameter("w_xf", Tensor(xs));
  p.w_hf = Parameter("w_hf", Tensor(hs));
  p.w_xc = Parameter("w_xc", Tensor(xs));
  p.w_hc = Parameter("w_hc", Tensor(hs));
  p.w_xo = Parameter("w_xo", Tensor(xs));
  p.w_ho = Parameter("w_ho", Tensor(hs));
  p.w_ci = Parameter("w_ci", Tensor(ps));
  p.w_cf = Parameter("w_cf", Tensor(ps));
  p.w_co = Parameter("w_co", Tensor(ps));
  p.b_i = Parameter("b_i", Tensor(bs));
  p.b_f = Parameter("b_f", Tensor(bs));
  p.b_c = Parameter("b_c", Tensor(bs));
  p.b_o = Parameter("b_o", Tensor(bs));
  return p;
}

ConvLstmParams ConvLstmParams::uniform(const ConvLstmShape& shape, double bound, std::mt19937_64& rng) {
  ConvLstmParams p = zeros(shape);
  for (Parameter* q : p.parameters()) core::init_uniform(q->value, bound, rng);
  return p;
}

ConvLstmShape ConvLstmParams::shape() const {
  const auto& k = w_xi.value;
  const auto& peep = w_ci.value;
  if (k.rank() != 4 || peep.rank() != 3) throw DimensionError("ConvLSTM parameters are not initialized");
  return {peep.dim(0), peep.dim(1), k.dim(2), k.dim(3), k.dim(0), k.dim(1)};
}

std::vector<Parameter*> ConvLstmParams::parameters() {
  return {&w_xi, &w_hi, &w_xf, &w_hf, &w_xc, &w_hc, &w_xo, &w_ho, &w_ci, &w_cf, &w_co, &b_i, &b_f, &b_c, &b_o};
}

std::vector<const Parameter*> ConvLstmParams::parameters() const {
  return {&w_xi, &w_hi, &w_xf, &w_hf, &w_xc, &w_hc, &w_xo, &w_ho, &w_ci, &w_cf, &w_co, &b_i, &b_f, &b_c, &b_o};
}

void ConvLstmParams::validate() const {
  const auto s = shape();
  const Shape xs{s.kernel_h, s.kernel_w, s.input_channels, s.hidden_channels};
  const Shape hs{s.kernel_h, s.kernel_w, s.hidden_channels, s.hidden_channels};
  const Shape ps{s.height, s.width, s.hidden_channels};
  const Shape bs{s.hidden_channels};
  for (const Parameter* w : {&w_xi, &w_xf, &w_xc, &w_xo}) {
    if (w->value.shape() != xs) throw DimensionError("ConvLSTM input kernel '" + w->name + "' must be " + core::shape_string(xs));
  }
  for (const Parameter* w : {&w_hi, &w_hf, &w_hc, &w_ho}) {
    if (w->value.shape() != hs) throw DimensionError("ConvLSTM hidden kernel '" + w->name + "' must be " + core::shape_string(hs));
  }
  for (const Parameter* w : {&w_ci, &w_cf, &w_co}) {
    if (w->value.shape() != ps) throw DimensionError("ConvLSTM peephole '" + w->name + "' must be " + core::shape_string(ps));
  }
  for (const Parameter* b : {&b_i, &b_f, &b_c, &b_o}) {
    if (b->value.shape() != bs) throw DimensionError("ConvLSTM bias '" + b->name + "' must be " + core::shape_string(bs));
  }
}

ConvLstmState conv_lstm_zero_state(const ConvLstmShape& s, std::size_t batch) {
  const Shape shape = batch == 0 ? Shape{s.height, s.width, s.hidden_channels}
                                 : Shape{batch, s.height, s.width, s.hidden_channels};
  return {Tensor(shape), Tensor(shape)};
}

template <class P, class Bind>
void ConvLstmCell::bind_all(P& params, Bind bind) {
  params.validate();
  const Var x_parts[] = {bind(params.w_xi), bind(params.w_xf), bind(params.w_xc), bind(params.w_xo)};
  const Var h_parts[] = {bind(params.w_hi), bind(params.w_hf), bind(params.w_hc), bind(params.w_ho)};
  const Var b_parts[] = {bind(params.b_i), bind(params.b_f), bind(params.b_c), bind(params.b_o)};
  wx_ = graph_.concat(x_parts);
  wh_ = graph_.concat(h_parts);
  b_ = graph_.concat(b_parts);
  w_ci_ = bind(params.w_ci);
  w_cf_ = bind(params.w_cf);
  w_co_ = bind(params.w_co);
}

ConvLstmCell::ConvLstmCell(core::Graph& graph, ConvLstmParams& params, bool trainable)
    : graph_(graph), shape_(params.shape()) {
  bind_all(params, [&](Parameter& p) { return trainable ? graph_.parameter(p) : graph_.constant(p.value); });
}

ConvLstmCell::ConvLstmCell(core::Graph& graph, const ConvLstmParams& params) : graph_(graph), shape_(params.shape()) {
  bind_all(params, [&](const Parameter& p) { return graph_.constant(p.value); });
}

ConvLstmCell::State ConvLstmCell::constant_state(const ConvLstmState& s) {
  return {graph_.constant(s.h), graph_.constant(s.c)};
}

ConvLstmCell::State ConvLstmCell::step(Var x, State prev, ConvLstmGates* gates) {
  auto& g = graph_;
  const Shape xs = g.value(x).shape();
  const Shape hs = g.value(prev.h).shape();
  if (hs != g.value(prev.c).shape()) throw DimensionError("ConvLSTM H and C shapes differ");
  if (xs.size() < 3 || xs.back() != shape_.input_channels) {
    throw DimensionError("ConvLSTM input " + core::shape_string(xs) + " does not have " +
                         std::to_string(shape_.input_channels) + " channels");
  }
  if (xs[xs.size() - 3] != shape_.height || xs[xs.size() - 2] != shape_.width) {
    throw DimensionError("ConvLSTM input grid " + core::shape_string(xs) + " does not match the cell grid");
  }
  if (hs.back() != shape_.hidden_channels) throw DimensionError("ConvLSTM state channels do not match weights");

  core::Conv2dOptions same;
  same.padding = core::Padding::same;
  const std::size_t ch = shape_.hidden_channels;

  const Var z = g.broadcast_add(g.add(g.conv2d(x, wx_, same), g.conv2d(prev.h, wh_, same)), b_);
  const Var i = g.sigmoid(g.add(g.slice(z, 0, ch), g.broadcast_mul(prev.c, w_ci_)));
  const Var f = g.sigmoid(g.add(g.slice(z, ch, ch), g.broadcast_mul(prev.c, w_cf_)));
  const Var cand = g.tanh(g.slice(z, 2 * ch, ch));
  const Var c = g.add(g.mul(f, prev.c), g.mul(i, cand));
  const Var o = g.sigmoid(g.add(g.slice(z, 3 * ch, ch), g.broadcast_mul(c, w_co_)));
  const Var h = g.mul(o, g.tanh(c));
  if (gates) *gates = {i, f, cand, o};
  return {h, c};
}

ConvLstmState conv_lstm_step(const ConvLstmParams& params, const Tensor& x, const ConvLstmState& prev) {
  core::Graph g;
  ConvLstmCell cell(g, params);
  const auto next = cell.step(g.constant(x), cell.constant_state(prev));
  return {g.value(next.h), g.value(next.c)};
}

}  // namespace lgan::rnn

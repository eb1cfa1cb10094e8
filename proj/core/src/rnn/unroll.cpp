#include "lgan/rnn/unroll.hpp"

namespace lgan::rnn {

namespace {

template <class Cell, class Params, class Value>
std::vector<Value> unroll_values(const Params& params, std::span<const core::Tensor> sequence, const Value& init) {
  core::Graph g;
  Cell cell(g, params);
  std::vector<core::Var> xs;
  xs.reserve(sequence.size());
  for (const auto& t : sequence) xs.push_back(g.constant(t));
  const auto states = unroll(cell, std::span<const core::Var>(xs), cell.constant_state(init));
  std::vector<Value> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back({g.value(s.h), g.value(s.c)});
  return out;
}

}  // namespace

std::vector<LstmState> unroll(const LstmParams& params, std::span<const core::Tensor> sequence, const LstmState& init) {
  return unroll_values<LstmCell>(params, sequence, init);
}

std::vector<ConvLstmState> unroll(const ConvLstmParams& params, std::span<const core::Tensor> sequence,
                                  const ConvLstmState& init) {
  return unroll_values<ConvLstmCell>(params, sequence, init);
}

}  // namespace lgan::rnn

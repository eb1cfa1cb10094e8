#pragma once

#include <span>
#include <vector>

#include "lgan/core/graph.hpp"
#include "lgan/error.hpp"
#include "lgan/rnn/conv_lstm.hpp"
#include "lgan/rnn/lstm.hpp"

namespace lgan::rnn {

/// Runs `cell` over `sequence`, returning the state after every step.
/// Gradients flow back through all steps (BPTT) because every step is
/// recorded on the cell's graph.
template <class Cell>
std::vector<typename Cell::State> unroll(Cell& cell, std::span<const core::Var> sequence, typename Cell::State init) {
  if (sequence.empty()) throw ContractError("unroll needs a non-empty sequence");
  const core::Shape first = cell.graph().value(sequence.front()).shape();
  std::vector<typename Cell::State> states;
  states.reserve(sequence.size());
  auto state = init;
  for (core::Var x : sequence) {
    if (cell.graph().value(x).shape() != first) throw DimensionError("unroll sequence has non-uniform shapes");
    state = cell.step(x, state);
    states.push_back(state);
  }
  return states;
}

std::vector<LstmState> unroll(const LstmParams& params, std::span<const core::Tensor> sequence, const LstmState& init);
std::vector<ConvLstmState> unroll(const ConvLstmParams& params, std::span<const core::Tensor> sequence,
                                  const ConvLstmState& init);

}  // namespace lgan::rnn

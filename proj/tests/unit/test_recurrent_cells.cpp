#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "lgan/core/params.hpp"
#include "lgan/error.hpp"
#include "lgan/rnn/conv_lstm.hpp"
#include "lgan/rnn/lstm.hpp"
#include "lgan/rnn/unroll.hpp"

using namespace lgan;
using core::Tensor;
using lgan::testing::conv_from_lstm;

namespace {

Tensor random_tensor(core::Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> d(lo, hi);
  for (auto& v : t.data()) v = d(rng);
  return t;
}

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Hand transcription of the scalar LSTM recurrence.
struct ScalarLstm {
  double wxi, whi, wxf, whf, wxc, whc, wxo, who, bi, bf, bc, bo;
  std::pair<double, double> step(double x, double h, double c) const {
    const double f = sig(wxf * x + whf * h + bf);
    const double i = sig(wxi * x + whi * h + bi);
    const double cand = std::tanh(wxc * x + whc * h + bc);
    const double cn = f * c + i * cand;
    const double o = sig(wxo * x + who * h + bo);
    return {o * std::tanh(cn), cn};
  }
};

ScalarLstm to_scalar(const rnn::LstmParams& p) {
  return {p.w_xi.value[0], p.w_hi.value[0], p.w_xf.value[0], p.w_hf.value[0], p.w_xc.value[0], p.w_hc.value[0],
          p.w_xo.value[0], p.w_ho.value[0], p.b_i.value[0],  p.b_f.value[0],  p.b_c.value[0],  p.b_o.value[0]};
}

}  // namespace

TEST(LstmStep, ZeroWeightsHalveCell) {
  const auto p = rnn::LstmParams::zeros(1, 1);
  const auto s = rnn::lstm_step(p, Tensor::vector({0.37}), {Tensor::vector({0.0}), Tensor::vector({1.0})});
  EXPECT_DOUBLE_EQ(s.c[0], 0.5);
  EXPECT_DOUBLE_EQ(s.h[0], 0.5 * std::tanh(0.5));
}

TEST(LstmStep, UnitWeightsFromZeroStateStayZero) {
  auto p = rnn::LstmParams::zeros(1, 1);
  for (auto* w : {&p.w_xi, &p.w_hi, &p.w_xf, &p.w_hf, &p.w_xc, &p.w_hc, &p.w_xo, &p.w_ho}) w->value.fill(1.0);
  const auto s = rnn::lstm_step(p, Tensor::vector({0.0}), rnn::lstm_zero_state(1));
  EXPECT_EQ(s.c[0], 0.0);
  EXPECT_EQ(s.h[0], 0.0);
}

TEST(LstmStep, RandomScalarCellMatchesHandOracle) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = rnn::LstmParams::uniform(1, 1, 2.0, rng);
    std::uniform_real_distribution<double> d(-2, 2);
    const double x = d(rng), h = d(rng), c = d(rng);
    const auto s = rnn::lstm_step(p, Tensor::vector({x}), {Tensor::vector({h}), Tensor::vector({c})});
    const auto [h_ref, c_ref] = to_scalar(p).step(x, h, c);
    EXPECT_NEAR(s.h[0], h_ref, 1e-14);
    EXPECT_NEAR(s.c[0], c_ref, 1e-14);
  }
}

TEST(LstmStep, ShapeMismatchIsDimensionError) {
  const auto p = rnn::LstmParams::zeros(3, 2);
  EXPECT_THROW(rnn::lstm_step(p, Tensor::vector({1, 2}), rnn::lstm_zero_state(2)), DimensionError);
  EXPECT_THROW(rnn::lstm_step(p, Tensor::vector({1, 2, 3}), rnn::lstm_zero_state(3)), DimensionError);
}

TEST(LstmStep, GateRanges) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    auto p = rnn::LstmParams::uniform(3, 4, 1.5, rng);
    core::Graph g;
    rnn::LstmCell cell(g, p);
    rnn::LstmGates gates;
    auto st = cell.constant_state({random_tensor({5, 4}, rng), random_tensor({5, 4}, rng)});
    for (int t = 0; t < 3; ++t) {
      st = cell.step(g.constant(random_tensor({5, 3}, rng, -3, 3)), st, &gates);
      for (auto v : {gates.input, gates.forget, gates.output}) {
        for (double x : g.value(v).data()) {
          EXPECT_GT(x, 0.0);
          EXPECT_LT(x, 1.0);
        }
      }
      for (double x : g.value(gates.candidate).data()) {
        EXPECT_GT(x, -1.0);
        EXPECT_LT(x, 1.0);
      }
    }
  }
}

TEST(LstmStep, ForgetExtremes) {
  std::mt19937_64 rng(8);
  auto p = rnn::LstmParams::uniform(2, 3, 0.1, rng);
  const auto prev = rnn::LstmState{random_tensor({3}, rng), random_tensor({3}, rng, 0.5, 2.0)};
  const Tensor x = random_tensor({2}, rng);

  p.b_f.value.fill(-50.0);
  p.b_i.value.fill(-50.0);
  auto s = rnn::lstm_step(p, x, prev);
  for (double v : s.c.data()) EXPECT_NEAR(v, 0.0, 1e-12);

  p.b_f.value.fill(50.0);
  s = rnn::lstm_step(p, x, prev);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(s.c[k], prev.c[k], 1e-9);
}

TEST(ConvLstmStep, ReducesToLstm) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t in = 1 + trial % 3, hid = 1 + trial % 4;
    const auto p = rnn::LstmParams::uniform(in, hid, 1.0, rng);
    const auto cp = conv_from_lstm(p);
    const Tensor x = random_tensor({in}, rng);
    const rnn::LstmState prev{random_tensor({hid}, rng), random_tensor({hid}, rng)};
    const auto s = rnn::lstm_step(p, x, prev);
    const auto cs = rnn::conv_lstm_step(cp, x.reshaped({1, 1, in}), {prev.h.reshaped({1, 1, hid}), prev.c.reshaped({1, 1, hid})});
    EXPECT_LT(core::max_abs_diff(s.h, cs.h.reshaped({hid})), 1e-12);
    EXPECT_LT(core::max_abs_diff(s.c, cs.c.reshaped({hid})), 1e-12);
  }
}

TEST(ConvLstmStep, ZeroParametersHalveCell) {
  const rnn::ConvLstmShape shape{3, 4, 2, 2, 3, 3};
  const auto p = rnn::ConvLstmParams::zeros(shape);
  std::mt19937_64 rng(1);
  auto prev = rnn::conv_lstm_zero_state(shape);
  prev.c.fill(1.0);
  const auto s = rnn::conv_lstm_step(p, random_tensor({3, 4, 2}, rng), prev);
  for (double v : s.c.data()) EXPECT_DOUBLE_EQ(v, 0.5);
}

TEST(ConvLstmStep, PreservesSpatialShape) {
  std::mt19937_64 rng(2);
  for (auto [h, w, k] : {std::tuple{5, 7, 3}, std::tuple{1, 8, 3}, std::tuple{4, 4, 1}, std::tuple{6, 3, 2}}) {
    const rnn::ConvLstmShape shape{std::size_t(h), std::size_t(w), 2, 3, std::size_t(k), std::size_t(k)};
    const auto p = rnn::ConvLstmParams::uniform(shape, 0.2, rng);
    const auto s = rnn::conv_lstm_step(p, random_tensor({std::size_t(h), std::size_t(w), 2}, rng), rnn::conv_lstm_zero_state(shape));
    EXPECT_EQ(s.h.shape(), (core::Shape{std::size_t(h), std::size_t(w), 3}));
    EXPECT_EQ(s.c.shape(), s.h.shape());
  }
}

TEST(ConvLstmStep, ChannelMismatchIsDimensionError) {
  const rnn::ConvLstmShape shape{2, 2, 2, 1, 1, 1};
  const auto p = rnn::ConvLstmParams::zeros(shape);
  EXPECT_THROW(rnn::conv_lstm_step(p, Tensor({2, 2, 3}), rnn::conv_lstm_zero_state(shape)), DimensionError);
}

TEST(ConvLstmStep, GateRanges) {
  std::mt19937_64 rng(6);
  const rnn::ConvLstmShape shape{3, 3, 1, 2, 3, 3};
  auto p = rnn::ConvLstmParams::uniform(shape, 1.0, rng);
  core::Graph g;
  rnn::ConvLstmCell cell(g, p);
  rnn::ConvLstmGates gates;
  auto st = cell.constant_state(rnn::conv_lstm_zero_state(shape, 4));
  for (int t = 0; t < 4; ++t) {
    st = cell.step(g.constant(random_tensor({4, 3, 3, 1}, rng, -3, 3)), st, &gates);
    for (auto v : {gates.input, gates.forget, gates.output}) {
      for (double x : g.value(v).data()) {
        EXPECT_GT(x, 0.0);
        EXPECT_LT(x, 1.0);
      }
    }
    for (double x : g.value(gates.candidate).data()) EXPECT_LT(std::abs(x), 1.0);
  }
}

TEST(Unroll, SingleStepEqualsStep) {
  std::mt19937_64 rng(3);
  const auto p = rnn::LstmParams::uniform(2, 3, 0.5, rng);
  const Tensor x = random_tensor({2}, rng);
  const auto init = rnn::lstm_zero_state(3);
  const Tensor seq[] = {x};
  const auto states = rnn::unroll(p, seq, init);
  ASSERT_EQ(states.size(), 1u);
  const auto s = rnn::lstm_step(p, x, init);
  EXPECT_EQ(states[0].h, s.h);
  EXPECT_EQ(states[0].c, s.c);
}

TEST(Unroll, ZeroParameterCellFollowsHalvingRecurrence) {
  const auto p = rnn::LstmParams::zeros(2, 1);
  std::mt19937_64 rng(12);
  std::vector<Tensor> seq;
  for (int t = 0; t < 8; ++t) seq.push_back(random_tensor({2}, rng, -10, 10));
  const rnn::LstmState init{Tensor::vector({0.0}), Tensor::vector({3.0})};
  const auto states = rnn::unroll(p, seq, init);
  for (std::size_t t = 0; t < states.size(); ++t) {
    const double c = 3.0 * std::pow(0.5, static_cast<double>(t + 1));
    EXPECT_NEAR(states[t].c[0], c, 1e-15);
    EXPECT_NEAR(states[t].h[0], 0.5 * std::tanh(c), 1e-15);
  }
}

TEST(Unroll, EmptySequenceIsContractError) {
  const auto p = rnn::LstmParams::zeros(1, 1);
  EXPECT_THROW(rnn::unroll(p, std::span<const Tensor>(), rnn::lstm_zero_state(1)), ContractError);
}

TEST(Unroll, NonUniformShapesRejected) {
  const auto p = rnn::LstmParams::zeros(2, 1);
  const Tensor seq[] = {Tensor({2}), Tensor({1, 2})};
  EXPECT_THROW(rnn::unroll(p, seq, rnn::lstm_zero_state(1)), DimensionError);
}

TEST(Bptt, LstmMatchesFiniteDifferences) {
  std::mt19937_64 rng(31);
  for (std::size_t len = 1; len <= 6; ++len) {
    auto p = rnn::LstmParams::uniform(3, 2, 0.8, rng);
    std::vector<Tensor> seq;
    for (std::size_t t = 0; t < len; ++t) seq.push_back(random_tensor({2, 3}, rng));
    const Tensor target = random_tensor({2, 2}, rng);
    auto params = p.parameters();
    const auto r = lgan::testing::check_gradients(params, [&](core::Graph& g) {
      rnn::LstmCell cell(g, p);
      std::vector<core::Var> xs;
      for (const auto& t : seq) xs.push_back(g.constant(t));
      const auto states = rnn::unroll(cell, std::span<const core::Var>(xs), cell.constant_state(rnn::lstm_zero_state(2, 2)));
      return g.sum(g.mul(states.back().h, g.constant(target)));
    });
    EXPECT_LT(r.max_rel_error, 1e-4) << "len " << len << ": " << r.worst;
  }
}

TEST(Bptt, ConvLstmMatchesFiniteDifferences) {
  std::mt19937_64 rng(37);
  for (std::size_t len = 1; len <= 6; ++len) {
    const rnn::ConvLstmShape shape{2, 3, 1, 2, 2, 3};
    auto p = rnn::ConvLstmParams::uniform(shape, 0.6, rng);
    std::vector<Tensor> seq;
    for (std::size_t t = 0; t < len; ++t) seq.push_back(random_tensor({2, 2, 3, 1}, rng));
    const Tensor target = random_tensor({2, 2, 3, 2}, rng);
    auto params = p.parameters();
    const auto r = lgan::testing::check_gradients(params, [&](core::Graph& g) {
      rnn::ConvLstmCell cell(g, p);
      std::vector<core::Var> xs;
      for (const auto& t : seq) xs.push_back(g.constant(t));
      const auto states =
          rnn::unroll(cell, std::span<const core::Var>(xs), cell.constant_state(rnn::conv_lstm_zero_state(shape, 2)));
      return g.sum(g.mul(states.back().h, g.constant(target)));
    });
    EXPECT_LT(r.max_rel_error, 1e-4) << "len " << len << ": " << r.worst;
  }
}

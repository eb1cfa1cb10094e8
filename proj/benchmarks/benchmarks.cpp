#include <benchmark/benchmark.h>

#include <random>

#include "lgan/core/graph.hpp"
#include "lgan/core/kernels.hpp"
#include "lgan/gan/model.hpp"
#include "lgan/resample/resample.hpp"
#include "lgan/rnn/conv_lstm.hpp"
#include "lgan/stats/stats.hpp"

namespace {

using namespace lgan;

core::Tensor random_tensor(core::Shape shape, std::mt19937_64& rng) {
  core::Tensor t(std::move(shape));
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (auto& v : t.data()) v = d(rng);
  return t;
}

void BM_Conv2dSame(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  const auto x = random_tensor({32, side, side, 4}, rng);
  const auto k = random_tensor({3, 3, 4, 4}, rng);
  core::Conv2dOptions o;
  o.padding = core::Padding::same;
  for (auto _ : state) benchmark::DoNotOptimize(core::conv2d(x, k, o));
}
BENCHMARK(BM_Conv2dSame)->Arg(4)->Arg(12);

void BM_ConvLstmStep(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  const rnn::ConvLstmShape shape{side, side, 1, 4, 3, 3};
  const auto p = rnn::ConvLstmParams::uniform(shape, 0.1, rng);
  const auto x = random_tensor({32, side, side, 1}, rng);
  const auto s0 = rnn::conv_lstm_zero_state(shape, 32);
  for (auto _ : state) benchmark::DoNotOptimize(rnn::conv_lstm_step(p, x, s0));
}
BENCHMARK(BM_ConvLstmStep)->Arg(4)->Arg(12);

void BM_ConvLstmStepWithBackward(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const rnn::ConvLstmShape shape{8, 1, 1, 4, 3, 3};
  auto p = rnn::ConvLstmParams::uniform(shape, 0.1, rng);
  const auto x = random_tensor({32, 8, 1, 1}, rng);
  const auto s0 = rnn::conv_lstm_zero_state(shape, 32);
  for (auto _ : state) {
    core::Graph g;
    rnn::ConvLstmCell cell(g, p);
    const auto s = cell.step(g.constant(x), cell.constant_state(s0));
    g.backward(g.sum(s.h));
  }
}
BENCHMARK(BM_ConvLstmStepWithBackward);

void BM_LganEpoch(benchmark::State& state) {
  std::mt19937_64 rng(4);
  gan::DiscriminatorSpec d;
  d.layout = {3, 1, 8, 1, true};
  d.repeat_count = 3;
  gan::GeneratorSpec g;
  g.layout = d.layout;
  features::FeatureMatrix m;
  m.class_names = {"a", "b"};
  for (std::size_t j = 0; j < d.layout.record_width(); ++j) m.column_names.push_back("f" + std::to_string(j));
  std::normal_distribution<double> n(0.0, 1.0);
  for (std::size_t i = 0; i < 256; ++i) {
    std::vector<double> row(d.layout.record_width());
    for (auto& v : row) v = n(rng) + static_cast<double>(i % 2);
    m.rows.push_back(std::move(row));
    m.labels.push_back(static_cast<int>(i % 2));
  }
  gan::LganConfig c;
  c.epochs = 1;
  c.d_pretrain_epochs = 0;
  for (auto _ : state) benchmark::DoNotOptimize(gan::train_lgan(m, g, d, c));
}
BENCHMARK(BM_LganEpoch)->Unit(benchmark::kMillisecond);

void BM_BsmoteResample(benchmark::State& state) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<resample::LabeledPoint> data;
  for (int i = 0; i < state.range(0); ++i) {
    const int label = i % 4 == 0 ? 1 : 0;
    data.push_back({{n(rng) + label, n(rng), n(rng)}, label});
  }
  for (auto _ : state) benchmark::DoNotOptimize(resample::bsmote_resample(data, 1, 5, 10, 1.0, rng));
}
BENCHMARK(BM_BsmoteResample)->Arg(400)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_StudentizedRangeQuantile(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(stats::studentized_range_quantile(0.05, 6, 54.0));
}
BENCHMARK(BM_StudentizedRangeQuantile);

}  // namespace

BENCHMARK_MAIN();

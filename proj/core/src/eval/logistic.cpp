#include "lgan/eval/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lgan/core/graph.hpp"
#include "lgan/core/optimizer.hpp"
#include "lgan/core/params.hpp"
#include "lgan/error.hpp"

namespace lgan::eval {

std::vector<double> LogisticModel::probabilities(std::span<const double> row) const {
  const std::size_t f = weights.dim(0), c = classes();
  if (row.size() != f) throw DimensionError("logistic model expects " + std::to_string(f) + " features");
  std::vector<double> z(bias.data().begin(), bias.data().end());
  for (std::size_t i = 0; i < f; ++i) {
    for (std::size_t k = 0; k < c; ++k) z[k] += row[i] * weights[i * c + k];
  }
  const double top = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (auto& v : z) s += (v = std::exp(v - top));
  for (auto& v : z) v /= s;
  return z;
}

int LogisticModel::predict(std::span<const double> row) const {
  const auto p = probabilities(row);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

LogisticModel train_logistic(const features::FeatureMatrix& train, std::size_t classes, const LogisticConfig& config) {
  if (train.empty()) throw DataError("logistic regression on an empty training set");
  if (classes < 2) throw ContractError("logistic regression needs at least two classes");
  if (config.epochs == 0 || config.batch_size == 0) throw ConfigError("logistic epochs and batch size must be positive");
  train.validate();
  const std::size_t f = train.width();
  core::Parameter w("logistic.w", core::Tensor({f, classes}));
  core::Parameter b("logistic.b", core::Tensor({classes}));
  core::Parameter* params[] = {&w, &b};
  core::OptimizerConfig oc;
  oc.rule = core::UpdateRule::adam;
  oc.learning_rate = config.learning_rate;
  oc.l2 = config.l2;
  core::Optimizer opt(oc);
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t e = 0; e < config.epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t n = std::min(config.batch_size, order.size() - start);
      core::Tensor x({n, f}), y({n, classes});
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = order[start + i];
        const int label = train.labels[r];
        if (label < 0 || static_cast<std::size_t>(label) >= classes) throw DataError("label outside the class range");
        std::copy(train.rows[r].begin(), train.rows[r].end(), x.data().begin() + static_cast<std::ptrdiff_t>(i * f));
        y[i * classes + static_cast<std::size_t>(label)] = 1.0;
      }
      core::Graph g;
      const auto loss = g.softmax_cross_entropy(g.dense(g.constant(x), g.parameter(w), g.parameter(b)), y);
      if (!std::isfinite(g.value(loss)[0])) throw NumericalError("non-finite logistic loss at epoch " + std::to_string(e));
      core::zero_grads(params);
      g.backward(loss);
      opt.step(params);
    }
  }
  return {w.value, b.value};
}

}  // namespace lgan::eval

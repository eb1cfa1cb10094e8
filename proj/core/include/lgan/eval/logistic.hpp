#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lgan/core/tensor.hpp"
#include "lgan/features/matrix.hpp"

namespace lgan::eval {

struct LogisticConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  double learning_rate = 0.01;  // Adam
  double l2 = 1e-4;
  std::uint64_t seed = 0;
};

/// Multinomial logistic (softmax) regression.
struct LogisticModel {
  core::Tensor weights;  // [features, classes]
  core::Tensor bias;     // [classes]

  std::size_t classes() const { return bias.size(); }
  std::vector<double> probabilities(std::span<const double> row) const;
  int predict(std::span<const double> row) const;
};

/// Minibatch training from zero weights; the seed only drives the shuffles.
LogisticModel train_logistic(const features::FeatureMatrix& train, std::size_t classes, const LogisticConfig& config);

}  // namespace lgan::eval

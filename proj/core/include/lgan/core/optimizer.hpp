#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lgan/core/graph.hpp"

namespace lgan::core {

enum class UpdateRule { sgd_momentum, adam, rmsprop };

std::string to_string(UpdateRule rule);
UpdateRule parse_update_rule(const std::string& name);

struct OptimizerConfig {
  UpdateRule rule = UpdateRule::adam;
  double learning_rate = 1e-4;
  /// Momentum for sgd_momentum and rmsprop.
  double momentum = 0.0;
  /// Coupled L2 penalty: the gradient becomes g + l2 * p.
  double l2 = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// Decay of the squared-gradient average for rmsprop.
  double rms_decay = 0.9;

  void validate() const;
};

/// Gradient-descent update rule with per-parameter state.
///
/// The slot layout is fixed by the first step(): later calls must pass the
/// same parameters in the same order.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config);

  /// Applies one update from each parameter's `grad`. Throws NumericalError on a
  /// non-finite gradient before touching any parameter.
  void step(std::span<Parameter* const> params);

  const OptimizerConfig& config() const noexcept { return config_; }
  std::uint64_t steps() const noexcept { return steps_; }

 private:
  OptimizerConfig config_;
  std::uint64_t steps_ = 0;
  std::vector<Tensor> first_;
  std::vector<Tensor> second_;
};

}  // namespace lgan::core

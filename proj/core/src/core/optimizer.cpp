#include "lgan/core/optimizer.hpp"

#include <cmath>

#include "lgan/error.hpp"

namespace lgan::core {

std::string to_string(UpdateRule rule) {
  switch (rule) {
    case UpdateRule::sgd_momentum:
      return "sgd_momentum";
    case UpdateRule::adam:
      return "adam";
    case UpdateRule::rmsprop:
      return "rmsprop";
  }
  return "unknown";
}

UpdateRule parse_update_rule(const std::string& name) {
  if (name == "sgd_momentum" || name == "sgd") return UpdateRule::sgd_momentum;
  if (name == "adam") return UpdateRule::adam;
  if (name == "rmsprop") return UpdateRule::rmsprop;
  throw ConfigError("unknown optimizer rule '" + name + "'");
}

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0,1)");
  if (!(l2 >= 0.0)) throw ConfigError("l2 must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("adam betas must be in [0,1)");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (!(rms_decay >= 0.0 && rms_decay < 1.0)) throw ConfigError("rms_decay must be in [0,1)");
}

Optimizer::Optimizer(OptimizerConfig config) : config_(config) { config_.validate(); }

void Optimizer::step(std::span<Parameter* const> params) {
  if (first_.empty()) {
    for (const Parameter* p : params) {
      first_.emplace_back(p->value.shape());
      second_.emplace_back(p->value.shape());
    }
  }
  if (first_.size() != params.size()) throw ContractError("optimizer called with a different parameter set");
  for (std::size_t k = 0; k < params.size(); ++k) {
    const Parameter& p = *params[k];
    if (p.grad.shape() != p.value.shape() || first_[k].shape() != p.value.shape()) {
      throw DimensionError("gradient/moment shape does not match parameter '" + p.name + "'");
    }
    if (!p.grad.all_finite()) throw NumericalError("non-finite gradient for parameter '" + p.name + "'");
  }

  ++steps_;
  const double lr = config_.learning_rate;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));

  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    auto w = p.value.data();
    auto g = p.grad.data();
    auto m = first_[k].data();
    auto v = second_[k].data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g[i] + config_.l2 * w[i];
      switch (config_.rule) {
        case UpdateRule::sgd_momentum:
          m[i] = config_.momentum * m[i] - lr * gi;
          w[i] += m[i];
          break;
        case UpdateRule::adam: {
          m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * gi;
          v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * gi * gi;
          const double mhat = m[i] / bc1;
          const double vhat = v[i] / bc2;
          w[i] -= lr * mhat / (std::sqrt(vhat) + config_.epsilon);
          break;
        }
        case UpdateRule::rmsprop:
          v[i] = config_.rms_decay * v[i] + (1.0 - config_.rms_decay) * gi * gi;
          m[i] = config_.momentum * m[i] - lr * gi / (std::sqrt(v[i]) + config_.epsilon);
          w[i] += m[i];
          break;
      }
    }
  }
}

}  // namespace lgan::core

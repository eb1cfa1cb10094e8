#include "lgan/gan/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lgan/error.hpp"

namespace lgan::gan {

namespace {

double clamp_prob(double p) { return std::clamp(p, kProbFloor, 1.0 - kProbFloor); }

double mean_log(std::span<const double> p, bool complement) {
  if (p.empty()) throw ContractError("loss on an empty batch");
  double s = 0.0;
  for (double v : p) s += std::log(complement ? 1.0 - clamp_prob(v) : clamp_prob(v));
  return s / static_cast<double>(p.size());
}

// ln s(x) without overflow.
double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

void check_distribution(std::span<const double> p, const char* what) {
  for (double v : p) {
    if (v < 0.0 || !std::isfinite(v)) throw DataError(std::string(what) + " has negative or non-finite mass");
  }
}

}  // namespace

const char* to_string(GeneratorLoss v) { return v == GeneratorLoss::saturating ? "saturating" : "nonsaturating"; }

GeneratorLoss parse_generator_loss(const std::string& s) {
  if (s == "saturating") return GeneratorLoss::saturating;
  if (s == "nonsaturating") return GeneratorLoss::nonsaturating;
  throw ConfigError("unknown generator loss '" + s + "' (expected saturating or nonsaturating)");
}

double bce_loss(std::span<const double> targets, std::span<const double> probs) {
  if (targets.size() != probs.size()) throw DimensionError("bce_loss: targets and probabilities differ in length");
  if (probs.empty()) throw ContractError("loss on an empty batch");
  double s = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = clamp_prob(probs[i]);
    s += targets[i] * std::log(p) + (1.0 - targets[i]) * std::log(1.0 - p);
  }
  return -s / static_cast<double>(probs.size());
}

double bce_loss_logits(std::span<const double> targets, std::span<const double> logits) {
  if (targets.size() != logits.size()) throw DimensionError("bce_loss_logits: targets and logits differ in length");
  if (logits.empty()) throw ContractError("loss on an empty batch");
  double s = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    s += targets[i] * log_sigmoid(logits[i]) + (1.0 - targets[i]) * log_sigmoid(-logits[i]);
  }
  return -s / static_cast<double>(logits.size());
}

double discriminator_loss(std::span<const double> d_real, std::span<const double> d_fake) {
  return -0.5 * mean_log(d_real, false) - 0.5 * mean_log(d_fake, true);
}

double generator_loss(std::span<const double> d_fake, GeneratorLoss variant) {
  return variant == GeneratorLoss::saturating ? mean_log(d_fake, true) : -mean_log(d_fake, false);
}

std::vector<double> optimal_discriminator(std::span<const double> p_data, std::span<const double> p_g) {
  if (p_data.size() != p_g.size()) throw DimensionError("distributions have different supports");
  check_distribution(p_data, "p_data");
  check_distribution(p_g, "p_g");
  std::vector<double> d(p_data.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double s = p_data[i] + p_g[i];
    d[i] = s == 0.0 ? 0.5 : p_data[i] / s;
  }
  return d;
}

double minimax_value(std::span<const double> p_data, std::span<const double> p_g, std::span<const double> d) {
  if (p_data.size() != p_g.size() || d.size() != p_g.size()) throw DimensionError("support sizes differ");
  double v = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (p_data[i] > 0.0) v += p_data[i] * std::log(d[i]);
    if (p_g[i] > 0.0) v += p_g[i] * std::log(1.0 - d[i]);
  }
  return v;
}

double jensen_shannon(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw DimensionError("distributions have different supports");
  check_distribution(p, "p");
  check_distribution(q, "q");
  double js = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0.0) js += 0.5 * p[i] * std::log(p[i] / m);
    if (q[i] > 0.0) js += 0.5 * q[i] * std::log(q[i] / m);
  }
  return js;
}

double minimax_value_at_optimum(std::span<const double> p_data, std::span<const double> p_g) {
  return 2.0 * jensen_shannon(p_g, p_data) - 2.0 * std::numbers::ln2;
}

}  // namespace lgan::gan

#pragma once

#include <span>
#include <string>
#include <vector>

namespace lgan::gan {

/// Probabilities are clamped to [kProbFloor, 1 - kProbFloor] before any log.
inline constexpr double kProbFloor = 1e-12;

enum class GeneratorLoss { saturating, nonsaturating };

const char* to_string(GeneratorLoss v);
GeneratorLoss parse_generator_loss(const std::string& s);

/// -mean(y ln p + (1-y) ln(1-p)).
double bce_loss(std::span<const double> targets, std::span<const double> probs);

/// Same quantity from logits, using ln s(x) = -softplus(-x).
double bce_loss_logits(std::span<const double> targets, std::span<const double> logits);

/// -1/2 mean(ln D(x)) - 1/2 mean(ln(1 - D(G(z)))).
double discriminator_loss(std::span<const double> d_real, std::span<const double> d_fake);

/// saturating: mean(ln(1 - D(G(z)))); nonsaturating: -mean(ln D(G(z))). Both are minimized.
double generator_loss(std::span<const double> d_fake, GeneratorLoss variant = GeneratorLoss::saturating);

/// p_data / (p_data + p_g) per support point; 0/0 gives 1/2.
std::vector<double> optimal_discriminator(std::span<const double> p_data, std::span<const double> p_g);

/// E_data[ln D] + E_g[ln(1 - D)] over a discrete support, with 0 ln 0 = 0.
double minimax_value(std::span<const double> p_data, std::span<const double> p_g, std::span<const double> d);

/// Jensen-Shannon divergence in nats against the midpoint mixture.
double jensen_shannon(std::span<const double> p, std::span<const double> q);

/// 2 JSD(p_g || p_data) - 2 ln 2.
double minimax_value_at_optimum(std::span<const double> p_data, std::span<const double> p_g);

}  // namespace lgan::gan

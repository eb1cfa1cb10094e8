#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lgan/features/matrix.hpp"

namespace lgan::io {

enum class SynthKind { pva, ecg };

const char* to_string(SynthKind k);
SynthKind parse_synth_kind(const std::string& s);

struct SynthOptions {
  SynthKind kind = SynthKind::pva;
  std::size_t n = 1000;
  double anomaly_fraction = 0.3;
  /// Anomalous labels, dealt round-robin. Empty picks the kind's full set:
  /// {BSA, DTA} for pva, {abnormal} for ecg with `ecg_classes` 2, {S, V, F, Q} with 5.
  std::vector<std::string> anomaly_classes;
  std::size_t patients = 37;
  std::size_t ecg_classes = 2;
  /// Relative multiplicative jitter on every nonzero flow or ECG sample.
  double sample_noise = 0.02;
  std::uint64_t seed = 0;
};

/// One breath's shape parameters. Times in seconds, flows in L/min.
struct BreathShape {
  double peak_flow = 40.0;
  double inspiratory_time = 1.0;
  double pause = 0.2;
  double expiratory_time = 2.0;
  double decay = 0.3;
  /// Second inspiration for a double trigger; 0 disables it.
  double second_inspiration = 0.0;
};

inline constexpr double kFlowSampleInterval = 0.02;  // 50 Hz

/// Sampled flow: half-sine inspiration(s), zero-flow pause, then a
/// gamma-shaped expiration sized to return the inspired volume if allowed
/// to finish. Deterministic given the shape.
std::vector<double> breath_waveform(const BreathShape& shape, double dt = kFlowSampleInterval);

/// Trapezoidal area of the positive part of the flow (L/min * s).
double positive_flow_area(std::span<const double> flow, double dt);

/// The eleven breath features in canonical column order.
std::vector<double> breath_features(std::span<const double> flow, double dt = kFlowSampleInterval);

struct SynthResult {
  features::FeatureMatrix data;
  /// Raw flow curves (pva) or beats (ecg), one per row.
  std::vector<std::vector<double>> signals;
  std::size_t anomalies = 0;
};

/// Seeded synthetic dataset. The anomalous row count is
/// round(n * anomaly_fraction). Throws ConfigError when either class would
/// be empty.
SynthResult synth_dataset(const SynthOptions& options);

}  // namespace lgan::io

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lgan/core/optimizer.hpp"
#include "lgan/features/matrix.hpp"
#include "lgan/gan/losses.hpp"
#include "lgan/gan/networks.hpp"

namespace lgan::gan {

struct LganConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::size_t d_pretrain_epochs = 5;
  std::size_t d_steps = 1;
  std::size_t g_steps = 1;
  core::OptimizerConfig d_optimizer{core::UpdateRule::adam, 1e-4};
  core::OptimizerConfig g_optimizer{core::UpdateRule::sgd_momentum, 0.005, 0.6, 0.1};
  GeneratorLoss generator_loss = GeneratorLoss::saturating;
  /// Weight of the class-head cross-entropy inside the discriminator loss.
  double class_weight = 1.0;
  /// One-sided smoothing: real rows are scored against target 1 - a instead of 1.
  double real_label_smoothing = 0.0;
  double init_bound = 0.08;
  /// Mutual-information regularizer weight; only 0 is supported.
  double lambda = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainingHistory {
  std::vector<double> pretrain_d_loss;  // per lock epoch
  std::vector<double> d_loss;           // per adversarial epoch
  std::vector<double> g_loss;
};

struct LganModel {
  GeneratorSpec generator_spec;
  DiscriminatorSpec discriminator_spec;
  GeneratorParams generator;
  DiscriminatorParams discriminator;
  LganConfig config;
  TrainingHistory history;
  std::vector<std::string> class_names;
  /// Free-form preprocessing facts (feature columns, scaling) carried with the model.
  std::map<std::string, std::string> metadata;
};

enum class Phase { pretrain, discriminator, generator };

const char* to_string(Phase p);

struct StepEvent {
  Phase phase = Phase::pretrain;
  std::size_t epoch = 0;
  std::size_t step = 0;  // counts optimizer updates across the whole run
  double loss = 0.0;
  std::uint64_t generator_checksum = 0;
  std::uint64_t discriminator_checksum = 0;
};

/// Called after every optimizer update. Checksums are only computed when an
/// observer is installed.
using StepObserver = std::function<void(const StepEvent&)>;

/// Lock-phase pretraining of the discriminator, then alternating updates
/// with the other network frozen. Rows are records laid out per `gspec` and `dspec`.
LganModel train_lgan(const features::FeatureMatrix& train, const GeneratorSpec& gspec, const DiscriminatorSpec& dspec,
                     const LganConfig& config, const StepObserver& observer = {});

/// Trains only the discriminator's class head and trunk on real data, with
/// the same optimizer and schedule as the lock phase; no generator is involved.
DiscriminatorParams train_classifier(const features::FeatureMatrix& train, const DiscriminatorSpec& spec,
                                     const LganConfig& config);

struct Prediction {
  int label = 0;
  std::vector<double> probabilities;
};

/// Class-head argmax with a uniform label condition.
std::vector<Prediction> classify(const DiscriminatorParams& params, const DiscriminatorSpec& spec,
                                 std::span<const std::vector<double>> records);
std::vector<Prediction> classify(const LganModel& model, std::span<const std::vector<double>> records);
Prediction classify(const LganModel& model, std::span<const double> record);

/// Mean real/fake probability of the discriminator over records with their labels.
double mean_real_probability(const LganModel& model, std::span<const std::vector<double>> records,
                             std::span<const int> labels);

/// Draws `n` generated records conditioned on `labels` (one per record).
std::vector<std::vector<double>> sample_generator(const LganModel& model, std::span<const int> labels,
                                                  std::uint64_t seed);

inline constexpr std::uint32_t kModelFormatVersion = 1;

std::string serialize_model(const LganModel& model);
LganModel deserialize_model(const std::string& bytes);
void save_model(const LganModel& model, const std::string& path);
LganModel load_model(const std::string& path);

}  // namespace lgan::gan

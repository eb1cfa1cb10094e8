#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lgan/eval/evaluation.hpp"
#include "lgan/features/matrix.hpp"
#include "lgan/gan/model.hpp"
#include "lgan/io/config.hpp"
#include "lgan/stats/stats.hpp"

namespace lgan::io {

/// Sub-seed for a named random stream. Streams: 1 synthetic data, 2 holdout
/// split, 3 fold plan, 4 resampling (index = fold, or folds for the final
/// training side), 5 LGAN training (index = replicate, 1000 + fold for
/// cross-validation), 6 ConvLSTM baseline, 7 logistic baseline.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0);

/// Applies the task's row filter and relabeling: the binary PVA tasks keep
/// Normal plus one asynchrony class.
features::FeatureMatrix select_task_rows(const features::FeatureMatrix& m, Task task);

/// Base feature columns for the task before any ranking.
std::vector<std::string> task_feature_columns(const RunConfig& config, const features::FeatureMatrix& m);

/// Record layout for rows with `columns` base features and `prev` previous breaths.
gan::RecordLayout task_layout(Task task, std::size_t columns, std::size_t prev);

struct ResampleOutcome {
  features::FeatureMatrix data;
  std::size_t synthetic = 0;
  /// Classes that had no danger points and fell back to plain SMOTE.
  std::vector<std::string> smote_fallbacks;
};

/// Oversamples every non-majority class toward `ratio` times the largest
/// class. Synthetic rows get fresh negative row ids and group id -1.
ResampleOutcome resample_training(const features::FeatureMatrix& train, const RunConfig& config, std::uint64_t seed);

struct AlgorithmRuns {
  std::string name;
  std::vector<double> accuracies;  // one per replicate, on the held-out rows
};

struct PipelineReport {
  std::vector<std::string> classes;
  std::vector<std::string> base_columns;
  std::size_t rows = 0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::size_t resampled_rows = 0;
  std::size_t synthetic_rows = 0;
  std::vector<std::string> smote_fallbacks;
  std::size_t leaked_rows = 0;
  std::vector<double> fold_accuracies;
  eval::ConfusionMatrix test_confusion;
  double test_accuracy = 0.0;
  gan::TrainingHistory history;
  std::vector<AlgorithmRuns> runs;
  std::optional<stats::AnovaTable> anova;
  std::vector<stats::TukeyRow> tukey;
  std::vector<std::string> files;
};

using Logger = std::function<void(const std::string&)>;

/// load -> previous-breath augmentation over the time-ordered table -> task
/// rows -> holdout split -> feature selection (training rows only) ->
/// standardization fitted on the training rows -> resampling of the training
/// side -> optional k-fold cross-validation (resampling inside each fold) ->
/// final LGAN -> replicate runs and baselines -> ANOVA and Tukey when at
/// least two algorithms ran -> report files in `config.out_dir`. Errors keep
/// their type and gain the stage name.
PipelineReport run_pipeline(const RunConfig& config, const Logger& log = {});

}  // namespace lgan::io

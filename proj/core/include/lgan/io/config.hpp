#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lgan/eval/evaluation.hpp"
#include "lgan/features/preprocess.hpp"
#include "lgan/features/scoring.hpp"
#include "lgan/gan/model.hpp"

namespace lgan::io {

struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// Flat `key = value` text with `#` comments and blank lines. Keys may not
/// repeat. Throws ConfigError naming the line.
std::vector<KeyValue> parse_key_values(std::istream& in, const std::string& source = "<config>");

enum class Task { pva_binary_bsa, pva_binary_dta, pva_multiclass, ecg_binary, ecg_multiclass };

const char* to_string(Task t);
Task parse_task(const std::string& s);
bool is_pva(Task t);

enum class ResampleMethod { none, smote, bsmote };

const char* to_string(ResampleMethod m);
ResampleMethod parse_resample_method(const std::string& s);

enum class OutputFormat { text, kv };

const char* to_string(OutputFormat f);
OutputFormat parse_output_format(const std::string& s);

struct RunConfig {
  Task task = Task::pva_binary_bsa;
  /// Input table; empty means a synthetic dataset is generated.
  std::string data;
  std::size_t synth_n = 2000;
  double anomaly_fraction = 0.3;
  std::size_t patients = 37;
  features::LengthMode ecg_length_mode = features::LengthMode::truncate;

  /// "auto" (task preset), "all", "bsa", "dta" or a comma-separated column list.
  std::string feature_preset = "auto";
  std::optional<features::ScoreMethod> select_method;
  /// Keep the best `select_top` ranked columns; 0 keeps all.
  std::size_t select_top = 0;
  std::size_t prev_breaths = 2;

  ResampleMethod resample = ResampleMethod::bsmote;
  std::size_t smote_k = 5;
  std::size_t bsmote_m = 10;
  double resample_ratio = 1.0;

  gan::DiscriminatorSpec discriminator;
  gan::GeneratorSpec generator;
  gan::LganConfig lgan;

  double test_fraction = 0.1;
  /// k-fold cross-validation on the training side; 0 or 1 disables it.
  std::size_t folds = 5;
  std::size_t replicates = 10;
  /// Extra algorithms run `replicates` times for the ANOVA: convlstm, logistic.
  std::vector<std::string> baselines{"convlstm", "logistic"};
  std::size_t logistic_epochs = 100;
  double logistic_learning_rate = 0.01;
  eval::CollapseMode collapse = eval::CollapseMode::literal;
  double alpha = 0.05;

  std::uint64_t seed = 0;
  std::string out_dir = "lgan-out";
  OutputFormat format = OutputFormat::text;

  void validate() const;
};

/// Applies `pairs` on top of `base`. Unknown keys and bad values raise ConfigError.
RunConfig apply_key_values(RunConfig base, const std::vector<KeyValue>& pairs, const std::string& source = "<config>");
RunConfig load_run_config(const std::string& path, RunConfig base = {});

/// Every key with its value; parses back to an equal configuration.
std::string render_run_config(const RunConfig& c);

}  // namespace lgan::io

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lgan::eval {

struct FoldPlan {
  std::size_t k = 5;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::size_t>> folds;

  /// Every row outside fold `f`, ascending.
  std::vector<std::size_t> training_rows(std::size_t f) const;
};

/// Stratified folds: each class is shuffled with `seed` and dealt round-robin,
/// continuing the deal position across classes so fold sizes stay within one.
FoldPlan kfold_split(std::size_t n, std::span<const int> labels, std::size_t k = 5, std::uint64_t seed = 0);

struct HoldoutSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stratified train/test split; each class contributes round(test_fraction * n_c)
/// rows to the test side (at least one when the class has two or more rows).
HoldoutSplit holdout_split(std::span<const int> labels, double test_fraction, std::uint64_t seed);

/// counts[p][t]: rows predicted p whose true class is t.
struct ConfusionMatrix {
  std::vector<std::string> class_names;
  std::vector<std::vector<std::uint64_t>> counts;

  std::size_t classes() const { return counts.size(); }
  std::uint64_t total() const;
  std::uint64_t trace() const;
};

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth,
                          std::span<const std::string> class_names);

struct BinaryCounts {
  std::uint64_t tp = 0, fn = 0, fp = 0, tn = 0;
  std::uint64_t total() const { return tp + fn + fp + tn; }
};

/// `literal` puts predicted-positive/true-other in fn and predicted-other/
/// true-positive in fp, following the figure's cell algebra. `conventional`
/// swaps them.
enum class CollapseMode { literal, conventional };

const char* to_string(CollapseMode m);
CollapseMode parse_collapse_mode(const std::string& s);

BinaryCounts binary_collapse(const ConfusionMatrix& m, std::size_t positive,
                             CollapseMode mode = CollapseMode::literal);

/// A ratio with a zero denominator is empty rather than NaN.
using Metric = std::optional<double>;

struct Metrics {
  Metric accuracy, sensitivity, specificity, fpr, precision;
};

Metrics metrics(const BinaryCounts& c);

/// trace / total.
double multiclass_accuracy(const ConfusionMatrix& m);

std::string format_metric(const Metric& v, int precision = 6);

/// Aligned plain-text rendering: the matrix ("Predicted \ True"), then one
/// metrics row per class as positive.
std::string render_report_text(const ConfusionMatrix& m, CollapseMode mode = CollapseMode::literal);

/// One `key=value` per line, keys prefixed by `prefix`.
std::string render_report_kv(const ConfusionMatrix& m, CollapseMode mode = CollapseMode::literal,
                             const std::string& prefix = "");

}  // namespace lgan::eval

#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace lgan::resample {

using Point = std::vector<double>;

struct LabeledPoint {
  Point features;
  int label = 0;
};

enum class MinorityCategory { noise, danger, safe };

const char* to_string(MinorityCategory c);

/// Indices of the k points closest to `query` (Euclidean), nearest first.
/// Equal distances keep the lower index first. `exclude` drops one index
/// from consideration, typically the query's own position.
std::vector<std::size_t> knn(std::span<const Point> points, std::span<const double> query, std::size_t k,
                             std::optional<std::size_t> exclude = std::nullopt);

/// Neighbors of points[index] among the other points.
std::vector<std::size_t> knn_of(std::span<const Point> points, std::size_t index, std::size_t k);

struct SyntheticSample {
  Point values;
  std::size_t seed = 0;      // index of p in the input set
  std::size_t neighbor = 0;  // index of q in the input set
  double gap = 0.0;          // u in p + u (q - p)
};

struct SmoteOptions {
  /// Replaces the Uniform[0,1] draw when set.
  std::optional<double> fixed_gap;
};

/// `amount` synthetic samples per minority point, each interpolated toward one
/// of its k nearest minority neighbors. Output is grouped by seed point.
std::vector<SyntheticSample> smote(std::span<const Point> minority, std::size_t k, std::size_t amount,
                                   std::mt19937_64& rng, const SmoteOptions& options = {});

struct CategorizedPoint {
  std::size_t index = 0;  // position in the full dataset
  MinorityCategory category = MinorityCategory::safe;
  std::size_t majority_neighbors = 0;
};

/// Classifies each minority point by how many of its m nearest neighbors in the
/// full dataset carry a different label: all -> noise, at least half -> danger,
/// fewer than half -> safe. Results follow dataset order.
std::vector<CategorizedPoint> bsmote_categorize(std::span<const LabeledPoint> dataset, int minority_label,
                                                std::size_t m);

/// Synthetic minority count needed so that minority = ratio * largest other class.
std::size_t synthetic_quota(std::span<const LabeledPoint> dataset, int minority_label, double target_ratio);

/// Borderline-SMOTE. Returns the original points unchanged followed by the
/// synthetic ones. Throws DataError when no danger point exists and the quota
/// is non-zero.
std::vector<LabeledPoint> bsmote_resample(std::span<const LabeledPoint> dataset, int minority_label, std::size_t k,
                                          std::size_t m, double target_ratio, std::mt19937_64& rng);

/// Plain SMOTE to the same ratio contract; seeds are visited round-robin.
std::vector<LabeledPoint> smote_resample(std::span<const LabeledPoint> dataset, int minority_label, std::size_t k,
                                         double target_ratio, std::mt19937_64& rng);

}  // namespace lgan::resample

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lgan/features/matrix.hpp"

namespace lgan::features {

enum class ScoreMethod { mi, chi2, fisher, pearson };

const char* to_string(ScoreMethod m);
ScoreMethod parse_score_method(const std::string& s);

struct FeatureScore {
  std::string name;
  ScoreMethod method = ScoreMethod::mi;
  double score = 0.0;
  std::optional<double> p_value;
};

/// Mutual information in nats between continuous x and discrete y, using the
/// mixed-type k-NN estimator. Clamped at 0.
double mi_gain(std::span<const double> x, std::span<const int> y, std::size_t k = 3);

struct ChiSquareResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t bins = 0;  // bins left after dropping empty ones
  std::size_t df = 0;
};

/// Pearson chi-square over an equal-frequency binning of x against y.
ChiSquareResult chi_square(std::span<const double> x, std::span<const int> y, std::size_t bins = 10);

/// Between-class over within-class scatter. +inf when every class has zero
/// variance but the means differ.
double fisher_score(std::span<const double> x, std::span<const int> y);

double pearson_corr(std::span<const double> x, std::span<const double> y);

struct RankOptions {
  std::size_t mi_neighbors = 3;
  std::size_t chi2_bins = 10;
};

/// Scores every column and sorts descending; ties keep column order.
/// Pearson scores are |r| against the numeric label.
std::vector<FeatureScore> rank_features(const FeatureMatrix& m, ScoreMethod method, const RankOptions& options = {});

}  // namespace lgan::features

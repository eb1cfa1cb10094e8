#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lgan/features/matrix.hpp"

namespace lgan::features {

/// Appends the previous n records of the same group to every record
/// (columns suffixed _prev1.._prevn). The first n records of each group are
/// dropped; groups with n or fewer records vanish and are counted in
/// `dropped_groups`. Without group ids the whole matrix is one group.
FeatureMatrix augment_previous(const FeatureMatrix& m, std::size_t n, std::size_t* dropped_groups = nullptr);

enum class LengthMode { truncate, subsample };

/// Zero-pads short signals; long ones are cut to the first `target` samples
/// or, in subsample mode, picked at evenly spaced indices.
std::vector<double> normalize_length(std::span<const double> signal, std::size_t target = 144,
                                     LengthMode mode = LengthMode::truncate);

/// Per-column affine map to zero mean, unit (population) variance.
/// Constant columns map to 0 and invert back to their mean.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const std::vector<std::vector<double>>& rows);
  std::vector<double> apply(std::span<const double> row) const;
  std::vector<double> invert(std::span<const double> row) const;
  void apply_in_place(std::vector<std::vector<double>>& rows) const;
};

FeatureMatrix standardize(const FeatureMatrix& m, Standardizer* fitted = nullptr);

/// Feature columns used for the two binary asynchrony tasks.
std::vector<std::string> bsa_feature_preset();
std::vector<std::string> dta_feature_preset();

/// All breath metadata columns, in file order.
std::vector<std::string> breath_feature_columns();

}  // namespace lgan::features

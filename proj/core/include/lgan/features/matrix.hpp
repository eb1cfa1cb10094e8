#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lgan::features {

/// Column-named table of records. `labels[i]` indexes `class_names`.
/// `group_ids` is either empty or one id per row (patient or segment).
/// `row_ids` is either empty or one stable id per row, used to trace rows
/// through splitting and resampling.
struct FeatureMatrix {
  std::vector<std::string> column_names;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::vector<std::string> class_names;
  std::vector<std::int64_t> group_ids;
  std::vector<std::int64_t> row_ids;

  std::size_t size() const { return rows.size(); }
  std::size_t width() const { return column_names.size(); }
  bool empty() const { return rows.empty(); }

  std::vector<double> column(std::size_t j) const;
  std::size_t column_index(const std::string& name) const;

  /// Throws DataError/DimensionError on any broken invariant.
  void validate() const;

  /// Rows at `indices`, in that order, with every per-row field carried along.
  FeatureMatrix subset(std::span<const std::size_t> indices) const;

  /// Keeps only the named columns, in the given order.
  FeatureMatrix select_columns(std::span<const std::string> names) const;

  std::vector<std::size_t> class_counts() const;
};

}  // namespace lgan::features

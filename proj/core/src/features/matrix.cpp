#include "lgan/features/matrix.hpp"

#include <cmath>
#include <set>

#include "lgan/error.hpp"

namespace lgan::features {

std::vector<double> FeatureMatrix::column(std::size_t j) const {
  if (j >= width()) throw DimensionError("column index out of range");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[j]);
  return out;
}

std::size_t FeatureMatrix::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < column_names.size(); ++j) {
    if (column_names[j] == name) return j;
  }
  throw DataError("no column named '" + name + "'");
}

void FeatureMatrix::validate() const {
  std::set<std::string> seen;
  for (const auto& n : column_names) {
    if (!seen.insert(n).second) throw DataError("duplicate column name '" + n + "'");
  }
  if (labels.size() != rows.size()) throw DimensionError("label count differs from row count");
  if (!group_ids.empty() && group_ids.size() != rows.size()) throw DimensionError("group id count differs from row count");
  if (!row_ids.empty() && row_ids.size() != rows.size()) throw DimensionError("row id count differs from row count");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != width()) {
      throw DimensionError("row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) + " values, expected " +
                           std::to_string(width()));
    }
    for (double v : rows[i]) {
      if (!std::isfinite(v)) throw DataError("row " + std::to_string(i) + " holds a non-finite value");
    }
    if (labels[i] < 0 || (!class_names.empty() && static_cast<std::size_t>(labels[i]) >= class_names.size())) {
      throw DataError("row " + std::to_string(i) + " has label " + std::to_string(labels[i]) + " outside the class set");
    }
  }
}

FeatureMatrix FeatureMatrix::subset(std::span<const std::size_t> indices) const {
  FeatureMatrix out;
  out.column_names = column_names;
  out.class_names = class_names;
  for (std::size_t i : indices) {
    if (i >= rows.size()) throw ContractError("subset index out of range");
    out.rows.push_back(rows[i]);
    out.labels.push_back(labels[i]);
    if (!group_ids.empty()) out.group_ids.push_back(group_ids[i]);
    if (!row_ids.empty()) out.row_ids.push_back(row_ids[i]);
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::string> names) const {
  std::vector<std::size_t> idx;
  for (const auto& n : names) idx.push_back(column_index(n));
  FeatureMatrix out = *this;
  out.column_names.assign(names.begin(), names.end());
  for (auto& r : out.rows) {
    std::vector<double> picked;
    picked.reserve(idx.size());
    for (std::size_t j : idx) picked.push_back(r[j]);
    r = std::move(picked);
  }
  return out;
}

std::vector<std::size_t> FeatureMatrix::class_counts() const {
  std::size_t classes = class_names.size();
  for (int l : labels) classes = std::max(classes, static_cast<std::size_t>(l) + 1);
  std::vector<std::size_t> counts(classes, 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];
  return counts;
}

}  // namespace lgan::features

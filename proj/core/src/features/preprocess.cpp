#include "lgan/features/preprocess.hpp"

#include <cmath>
#include <deque>
#include <map>

#include "lgan/error.hpp"

namespace lgan::features {

FeatureMatrix augment_previous(const FeatureMatrix& m, std::size_t n, std::size_t* dropped_groups) {
  if (n > 3) throw ConfigError("previous-breath count must be 0..3, got " + std::to_string(n));
  if (dropped_groups) *dropped_groups = 0;
  if (n == 0) return m;
  m.validate();

  FeatureMatrix out;
  out.class_names = m.class_names;
  out.column_names = m.column_names;
  for (std::size_t p = 1; p <= n; ++p) {
    for (const auto& c : m.column_names) out.column_names.push_back(c + "_prev" + std::to_string(p));
  }

  std::map<std::int64_t, std::deque<std::size_t>> history;
  std::map<std::int64_t, bool> emitted;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const std::int64_t g = m.group_ids.empty() ? 0 : m.group_ids[i];
    auto& h = history[g];
    emitted.emplace(g, false);
    if (h.size() == n) {
      std::vector<double> row = m.rows[i];
      for (auto it = h.rbegin(); it != h.rend(); ++it) row.insert(row.end(), m.rows[*it].begin(), m.rows[*it].end());
      out.rows.push_back(std::move(row));
      out.labels.push_back(m.labels[i]);
      if (!m.group_ids.empty()) out.group_ids.push_back(g);
      if (!m.row_ids.empty()) out.row_ids.push_back(m.row_ids[i]);
      emitted[g] = true;
      h.pop_front();
    }
    h.push_back(i);
  }
  if (dropped_groups) {
    for (const auto& [g, any] : emitted) *dropped_groups += any ? 0 : 1;
  }
  return out;
}

std::vector<double> normalize_length(std::span<const double> signal, std::size_t target, LengthMode mode) {
  if (signal.empty()) throw DataError("normalize_length on an empty signal");
  if (target == 0) throw ContractError("normalize_length target must be positive");
  std::vector<double> out(target, 0.0);
  if (signal.size() <= target) {
    std::copy(signal.begin(), signal.end(), out.begin());
  } else if (mode == LengthMode::truncate) {
    std::copy(signal.begin(), signal.begin() + static_cast<std::ptrdiff_t>(target), out.begin());
  } else {
    for (std::size_t i = 0; i < target; ++i) out[i] = signal[i * signal.size() / target];
  }
  return out;
}

Standardizer Standardizer::fit(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw DataError("cannot fit a standardizer on zero rows");
  const std::size_t w = rows.front().size();
  Standardizer s;
  s.mean.assign(w, 0.0);
  s.scale.assign(w, 0.0);
  const auto n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    if (r.size() != w) throw DimensionError("ragged rows");
    for (std::size_t j = 0; j < w; ++j) s.mean[j] += r[j];
  }
  for (auto& v : s.mean) v /= n;
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < w; ++j) s.scale[j] += (r[j] - s.mean[j]) * (r[j] - s.mean[j]);
  }
  for (auto& v : s.scale) v = std::sqrt(v / n);
  return s;
}

std::vector<double> Standardizer::apply(std::span<const double> row) const {
  if (row.size() != mean.size()) throw DimensionError("standardizer width mismatch");
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = scale[j] > 0.0 ? (row[j] - mean[j]) / scale[j] : 0.0;
  return out;
}

std::vector<double> Standardizer::invert(std::span<const double> row) const {
  if (row.size() != mean.size()) throw DimensionError("standardizer width mismatch");
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = row[j] * scale[j] + mean[j];
  return out;
}

void Standardizer::apply_in_place(std::vector<std::vector<double>>& rows) const {
  for (auto& r : rows) r = apply(r);
}

FeatureMatrix standardize(const FeatureMatrix& m, Standardizer* fitted) {
  const auto s = Standardizer::fit(m.rows);
  FeatureMatrix out = m;
  s.apply_in_place(out.rows);
  if (fitted) *fitted = s;
  return out;
}

std::vector<std::string> bsa_feature_preset() {
  return {"TVi", "TVe", "eTime", "iTime", "maxF", "minF", "ipAUC", "epAUC"};
}

std::vector<std::string> dta_feature_preset() {
  return {"I:E ratio", "inst_RR", "tve:tvi ratio", "iTime", "eTime", "TVi", "TVe", "ipAUC"};
}

std::vector<std::string> breath_feature_columns() {
  return {"TVi", "TVe", "iTime", "eTime", "maxF", "minF", "ipAUC", "epAUC", "I:E ratio", "inst_RR", "tve:tvi ratio"};
}

}  // namespace lgan::features

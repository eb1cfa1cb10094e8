#include "lgan/resample/resample.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "lgan/error.hpp"

namespace lgan::resample {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void check_points(std::span<const Point> points, std::size_t width) {
  for (const Point& p : points) {
    if (p.size() != width) throw DimensionError("points have non-uniform feature length");
    for (double v : p) {
      if (!std::isfinite(v)) throw DataError("non-finite feature value");
    }
  }
}

std::vector<Point> features_of(std::span<const LabeledPoint> dataset) {
  std::vector<Point> out;
  out.reserve(dataset.size());
  for (const auto& p : dataset) out.push_back(p.features);
  if (!out.empty()) check_points(out, out.front().size());
  return out;
}

Point interpolate(const Point& p, const Point& q, double u) {
  Point s(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) s[i] = p[i] + u * (q[i] - p[i]);
  return s;
}

double draw_gap(std::mt19937_64& rng, const SmoteOptions& options) {
  if (options.fixed_gap) return *options.fixed_gap;
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// Appends `quota` samples seeded round-robin from `seeds` (indices into `pool`),
// each interpolated toward one of the seed's k nearest neighbors within `pool`.
void append_round_robin(std::vector<LabeledPoint>& out, const std::vector<Point>& pool,
                        const std::vector<std::size_t>& seeds, std::size_t k, std::size_t quota, int label,
                        std::mt19937_64& rng) {
  std::vector<std::vector<std::size_t>> neighbors(seeds.size());
  for (std::size_t s = 0; s < seeds.size(); ++s) neighbors[s] = knn_of(pool, seeds[s], k);
  std::uniform_int_distribution<std::size_t> pick(0, k - 1);
  std::uniform_real_distribution<double> gap(0.0, 1.0);
  for (std::size_t j = 0; j < quota; ++j) {
    const std::size_t s = j % seeds.size();
    const std::size_t q = neighbors[s][pick(rng)];
    const double u = gap(rng);
    out.push_back({interpolate(pool[seeds[s]], pool[q], u), label});
  }
}

}  // namespace

const char* to_string(MinorityCategory c) {
  switch (c) {
    case MinorityCategory::noise:
      return "noise";
    case MinorityCategory::danger:
      return "danger";
    case MinorityCategory::safe:
      return "safe";
  }
  return "?";
}

std::vector<std::size_t> knn(std::span<const Point> points, std::span<const double> query, std::size_t k,
                             std::optional<std::size_t> exclude) {
  const std::size_t available = points.size() - (exclude && *exclude < points.size() ? 1 : 0);
  if (k == 0 || k > available) {
    throw ContractError("knn: k=" + std::to_string(k) + " outside [1, " + std::to_string(available) + "]");
  }
  std::vector<std::pair<double, std::size_t>> d;
  d.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (exclude && *exclude == i) continue;
    if (points[i].size() != query.size()) throw DimensionError("knn: point and query lengths differ");
    d.emplace_back(squared_distance(points[i], query), i);
  }
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = d[i].second;
  return out;
}

std::vector<std::size_t> knn_of(std::span<const Point> points, std::size_t index, std::size_t k) {
  if (index >= points.size()) throw ContractError("knn_of: index out of range");
  return knn(points, points[index], k, index);
}

std::vector<SyntheticSample> smote(std::span<const Point> minority, std::size_t k, std::size_t amount,
                                   std::mt19937_64& rng, const SmoteOptions& options) {
  if (k == 0) throw ContractError("smote: k must be positive");
  if (minority.size() <= k) {
    throw DataError("smote needs at least k+1=" + std::to_string(k + 1) + " minority points, got " +
                    std::to_string(minority.size()));
  }
  check_points(minority, minority.front().size());
  std::vector<SyntheticSample> out;
  out.reserve(minority.size() * amount);
  std::uniform_int_distribution<std::size_t> pick(0, k - 1);
  for (std::size_t i = 0; i < minority.size(); ++i) {
    const auto nbrs = knn_of(minority, i, k);
    for (std::size_t a = 0; a < amount; ++a) {
      const std::size_t q = nbrs[pick(rng)];
      const double u = draw_gap(rng, options);
      out.push_back({interpolate(minority[i], minority[q], u), i, q, u});
    }
  }
  return out;
}

std::vector<CategorizedPoint> bsmote_categorize(std::span<const LabeledPoint> dataset, int minority_label,
                                                std::size_t m) {
  const auto points = features_of(dataset);
  if (m == 0 || m + 1 > dataset.size()) {
    throw ContractError("bsmote: m=" + std::to_string(m) + " needs at least m+1 points in the dataset");
  }
  std::vector<CategorizedPoint> out;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset[i].label != minority_label) continue;
    std::size_t majority = 0;
    for (std::size_t j : knn_of(points, i, m)) majority += dataset[j].label != minority_label ? 1 : 0;
    MinorityCategory c = MinorityCategory::safe;
    if (majority == m) {
      c = MinorityCategory::noise;
    } else if (2 * majority >= m) {
      c = MinorityCategory::danger;
    }
    out.push_back({i, c, majority});
  }
  if (out.empty()) throw DataError("bsmote: no point carries minority label " + std::to_string(minority_label));
  return out;
}

std::size_t synthetic_quota(std::span<const LabeledPoint> dataset, int minority_label, double target_ratio) {
  if (!(target_ratio > 0.0) || !std::isfinite(target_ratio)) throw ConfigError("target ratio must be positive");
  std::map<int, std::size_t> counts;
  for (const auto& p : dataset) ++counts[p.label];
  const auto it = counts.find(minority_label);
  if (it == counts.end()) throw DataError("no point carries minority label " + std::to_string(minority_label));
  std::size_t largest_other = 0;
  for (const auto& [label, n] : counts) {
    if (label != minority_label) largest_other = std::max(largest_other, n);
  }
  if (largest_other == 0) throw DataError("dataset holds a single class");
  const auto target = static_cast<std::size_t>(std::llround(target_ratio * static_cast<double>(largest_other)));
  return target > it->second ? target - it->second : 0;
}

std::vector<LabeledPoint> bsmote_resample(std::span<const LabeledPoint> dataset, int minority_label, std::size_t k,
                                          std::size_t m, double target_ratio, std::mt19937_64& rng) {
  if (k == 0) throw ContractError("bsmote: k must be positive");
  std::vector<LabeledPoint> out(dataset.begin(), dataset.end());
  const std::size_t quota = synthetic_quota(dataset, minority_label, target_ratio);
  if (quota == 0) return out;

  std::vector<Point> pool;
  std::vector<std::size_t> seeds;
  for (const auto& c : bsmote_categorize(dataset, minority_label, m)) {
    if (c.category == MinorityCategory::noise) continue;
    if (c.category == MinorityCategory::danger) seeds.push_back(pool.size());
    pool.push_back(dataset[c.index].features);
  }
  if (seeds.empty()) throw DataError("bsmote: no danger points among the minority class");
  if (pool.size() < 2) throw DataError("bsmote: a danger point has no non-noise minority neighbor");
  append_round_robin(out, pool, seeds, std::min(k, pool.size() - 1), quota, minority_label, rng);
  return out;
}

std::vector<LabeledPoint> smote_resample(std::span<const LabeledPoint> dataset, int minority_label, std::size_t k,
                                         double target_ratio, std::mt19937_64& rng) {
  if (k == 0) throw ContractError("smote: k must be positive");
  std::vector<LabeledPoint> out(dataset.begin(), dataset.end());
  const std::size_t quota = synthetic_quota(dataset, minority_label, target_ratio);
  if (quota == 0) return out;
  std::vector<Point> pool;
  for (const auto& p : dataset) {
    if (p.label == minority_label) pool.push_back(p.features);
  }
  check_points(pool, pool.front().size());
  if (pool.size() < 2) throw DataError("smote needs at least two minority points");
  std::vector<std::size_t> seeds(pool.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = i;
  append_round_robin(out, pool, seeds, std::min(k, pool.size() - 1), quota, minority_label, rng);
  return out;
}

}  // namespace lgan::resample

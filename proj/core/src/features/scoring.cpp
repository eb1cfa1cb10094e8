#include "lgan/features/scoring.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "lgan/error.hpp"

namespace lgan::features {

namespace {

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) throw DimensionError("feature column and labels differ in length");
}

// Distance from sorted[i] to its k-th nearest other value in `sorted`.
double kth_neighbor_distance(const std::vector<double>& sorted, std::size_t i, std::size_t k) {
  std::size_t lo = i, hi = i + 1;
  double d = 0.0;
  for (std::size_t step = 0; step < k; ++step) {
    const bool left_ok = lo > 0;
    const bool right_ok = hi < sorted.size();
    const double dl = left_ok ? sorted[i] - sorted[lo - 1] : std::numeric_limits<double>::infinity();
    const double dr = right_ok ? sorted[hi] - sorted[i] : std::numeric_limits<double>::infinity();
    if (dl <= dr) {
      d = dl;
      --lo;
    } else {
      d = dr;
      ++hi;
    }
  }
  return d;
}

std::map<int, std::vector<std::size_t>> by_class(std::span<const int> y) {
  std::map<int, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < y.size(); ++i) out[y[i]].push_back(i);
  return out;
}

}  // namespace

const char* to_string(ScoreMethod m) {
  switch (m) {
    case ScoreMethod::mi:
      return "mi";
    case ScoreMethod::chi2:
      return "chi2";
    case ScoreMethod::fisher:
      return "fisher";
    case ScoreMethod::pearson:
      return "pearson";
  }
  return "?";
}

ScoreMethod parse_score_method(const std::string& s) {
  if (s == "mi") return ScoreMethod::mi;
  if (s == "chi2") return ScoreMethod::chi2;
  if (s == "fisher") return ScoreMethod::fisher;
  if (s == "pearson") return ScoreMethod::pearson;
  throw ConfigError("unknown score method '" + s + "' (expected mi, chi2, fisher or pearson)");
}

double mi_gain(std::span<const double> x, std::span<const int> y, std::size_t k) {
  check_lengths(x.size(), y.size());
  if (k == 0) throw ContractError("mi_gain: k must be positive");
  const auto classes = by_class(y);
  if (classes.size() < 2) return 0.0;
  if (x.size() < 20) throw ContractError("mi_gain needs at least 20 samples");

  std::vector<double> radius(x.size(), 0.0);
  std::vector<double> k_used(x.size(), 0.0);
  std::vector<double> label_count(x.size(), 0.0);
  for (const auto& [label, idx] : classes) {
    for (std::size_t i : idx) label_count[i] = static_cast<double>(idx.size());
    if (idx.size() < 2) continue;
    const std::size_t kk = std::min(k, idx.size() - 1);
    std::vector<std::pair<double, std::size_t>> vals;
    for (std::size_t i : idx) vals.emplace_back(x[i], i);
    std::sort(vals.begin(), vals.end());
    std::vector<double> sorted;
    for (const auto& v : vals) sorted.push_back(v.first);
    for (std::size_t r = 0; r < sorted.size(); ++r) {
      radius[vals[r].second] = std::nextafter(kth_neighbor_distance(sorted, r, kk), 0.0);
      k_used[vals[r].second] = static_cast<double>(kk);
    }
  }

  // Points alone in their class carry no neighbor information.
  std::vector<double> all;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (label_count[i] > 1) {
      kept.push_back(i);
      all.push_back(x[i]);
    }
  }
  if (kept.empty()) return 0.0;
  std::sort(all.begin(), all.end());

  using boost::math::digamma;
  double mean_k = 0, mean_label = 0, mean_m = 0;
  for (std::size_t i : kept) {
    // x +- r rounds, so settle the window edges on the distance itself.
    const double r = radius[i];
    auto lo = std::lower_bound(all.begin(), all.end(), x[i] - r);
    while (lo != all.end() && x[i] - *lo > r) ++lo;
    while (lo != all.begin() && x[i] - *(lo - 1) <= r) --lo;
    auto hi = std::upper_bound(all.begin(), all.end(), x[i] + r);
    while (hi != all.begin() && *(hi - 1) - x[i] > r) --hi;
    while (hi != all.end() && *hi - x[i] <= r) ++hi;
    const auto m = static_cast<double>(hi - lo);
    mean_k += digamma(k_used[i]);
    mean_label += digamma(label_count[i]);
    mean_m += digamma(m);
  }
  const auto n = static_cast<double>(kept.size());
  const double mi = digamma(n) + (mean_k - mean_label - mean_m) / n;
  return std::max(0.0, mi);
}

ChiSquareResult chi_square(std::span<const double> x, std::span<const int> y, std::size_t bins) {
  check_lengths(x.size(), y.size());
  if (bins < 2) throw ContractError("chi_square needs at least 2 bins");
  if (x.empty()) throw DataError("chi_square on an empty column");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  std::vector<double> edges;
  for (std::size_t b = 1; b < bins; ++b) edges.push_back(sorted[std::min(n - 1, n * b / bins)]);

  std::map<int, std::size_t> class_index;
  for (int l : y) class_index.emplace(l, 0);
  std::size_t ci = 0;
  for (auto& [l, idx] : class_index) idx = ci++;
  if (class_index.size() < 2) throw DataError("chi_square needs at least two label values");

  std::vector<std::vector<double>> table(bins, std::vector<double>(class_index.size(), 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const auto b = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), x[i]) - edges.begin());
    table[b][class_index[y[i]]] += 1.0;
  }
  // Empty bins arise from tied edges; folding them into a neighbor leaves the
  // table unchanged apart from the missing row.
  std::erase_if(table, [](const std::vector<double>& row) {
    return std::all_of(row.begin(), row.end(), [](double c) { return c == 0.0; });
  });
  if (table.size() < 2) throw DataError("chi_square: fewer than 2 non-empty bins after merging");

  std::vector<double> row_tot(table.size(), 0.0), col_tot(class_index.size(), 0.0);
  for (std::size_t b = 0; b < table.size(); ++b) {
    for (std::size_t c = 0; c < col_tot.size(); ++c) {
      row_tot[b] += table[b][c];
      col_tot[c] += table[b][c];
    }
  }
  double stat = 0.0;
  for (std::size_t b = 0; b < table.size(); ++b) {
    for (std::size_t c = 0; c < col_tot.size(); ++c) {
      const double e = row_tot[b] * col_tot[c] / static_cast<double>(n);
      stat += (table[b][c] - e) * (table[b][c] - e) / e;
    }
  }
  ChiSquareResult r;
  r.statistic = stat;
  r.bins = table.size();
  r.df = (table.size() - 1) * (col_tot.size() - 1);
  r.p_value = boost::math::gamma_q(static_cast<double>(r.df) / 2.0, stat / 2.0);
  return r;
}

double fisher_score(std::span<const double> x, std::span<const int> y) {
  check_lengths(x.size(), y.size());
  const auto classes = by_class(y);
  if (classes.size() < 2) throw DataError("fisher_score needs at least two classes");
  const double mu = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double between = 0.0, within = 0.0;
  for (const auto& [label, idx] : classes) {
    if (idx.size() < 2) throw DataError("fisher_score needs at least two samples per class");
    double mc = 0.0;
    for (std::size_t i : idx) mc += x[i];
    mc /= static_cast<double>(idx.size());
    double var = 0.0;
    for (std::size_t i : idx) var += (x[i] - mc) * (x[i] - mc);
    between += static_cast<double>(idx.size()) * (mc - mu) * (mc - mu);
    within += var;
  }
  if (within == 0.0) return between == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return between / within;
}

double pearson_corr(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("pearson_corr inputs differ in length");
  if (x.size() < 2) throw DataError("pearson_corr needs at least two samples");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw DataError("pearson_corr is undefined for a constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<FeatureScore> rank_features(const FeatureMatrix& m, ScoreMethod method, const RankOptions& options) {
  if (m.empty() || m.width() == 0) throw DataError("rank_features on an empty matrix");
  std::vector<double> numeric_labels(m.labels.begin(), m.labels.end());
  std::vector<FeatureScore> scores;
  for (std::size_t j = 0; j < m.width(); ++j) {
    const auto col = m.column(j);
    FeatureScore s{m.column_names[j], method, 0.0, std::nullopt};
    switch (method) {
      case ScoreMethod::mi:
        s.score = mi_gain(col, m.labels, options.mi_neighbors);
        break;
      case ScoreMethod::chi2: {
        const auto r = chi_square(col, m.labels, options.chi2_bins);
        s.score = r.statistic;
        s.p_value = r.p_value;
        break;
      }
      case ScoreMethod::fisher:
        s.score = fisher_score(col, m.labels);
        break;
      case ScoreMethod::pearson:
        s.score = std::abs(pearson_corr(col, numeric_labels));
        break;
    }
    scores.push_back(std::move(s));
  }
  std::stable_sort(scores.begin(), scores.end(),
                   [](const FeatureScore& a, const FeatureScore& b) { return a.score > b.score; });
  return scores;
}

}  // namespace lgan::features

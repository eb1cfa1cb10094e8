#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <numeric>
#include <random>

#include "lgan/error.hpp"
#include "lgan/features/preprocess.hpp"
#include "lgan/features/scoring.hpp"

using namespace lgan;
using namespace lgan::features;

namespace {

// O(n^2) transcription of the mixed continuous/discrete k-NN estimator.
double mi_oracle(const std::vector<double>& x, const std::vector<int>& y, std::size_t k) {
  const std::size_t n = x.size();
  double acc_k = 0, acc_label = 0, acc_m = 0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> same;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && y[j] == y[i]) same.push_back(std::abs(x[j] - x[i]));
    }
    if (same.empty()) continue;
    std::sort(same.begin(), same.end());
    const std::size_t kk = std::min(k, same.size());
    const double r = std::nextafter(same[kk - 1], 0.0);
    ++used;
    acc_k += boost::math::digamma(static_cast<double>(kk));
    acc_label += boost::math::digamma(static_cast<double>(same.size() + 1));
    std::size_t m = 0;
    for (std::size_t j = 0; j < n; ++j) {
      std::size_t cls = 0;
      for (std::size_t t = 0; t < n; ++t) cls += y[t] == y[j] ? 1 : 0;
      if (cls > 1 && std::abs(x[j] - x[i]) <= r) ++m;
    }
    acc_m += boost::math::digamma(static_cast<double>(m));
  }
  const double u = static_cast<double>(used);
  return std::max(0.0, boost::math::digamma(u) + (acc_k - acc_label - acc_m) / u);
}

FeatureMatrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  FeatureMatrix m;
  m.class_names = {"a", "b"};
  for (std::size_t j = 0; j < cols; ++j) m.column_names.push_back("f" + std::to_string(j));
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<double> r(cols);
    for (auto& v : r) v = d(rng);
    m.rows.push_back(r);
    m.labels.push_back(static_cast<int>(i % 2));
    m.row_ids.push_back(static_cast<std::int64_t>(i));
  }
  return m;
}

}  // namespace

TEST(MutualInformation, ConstantColumnIsZero) {
  std::vector<double> x(100, 3.0);
  std::vector<int> y(100);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>(i % 2);
  EXPECT_EQ(mi_gain(x, y), 0.0);
}

TEST(MutualInformation, ConstantLabelIsZero) {
  std::vector<double> x(30);
  std::iota(x.begin(), x.end(), 0.0);
  std::vector<int> y(30, 1);
  EXPECT_EQ(mi_gain(x, y), 0.0);
}

TEST(MutualInformation, BalancedThresholdSplitNearLn2) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(2000);
  for (auto& v : x) v = u(rng);
  std::vector<double> s = x;
  std::nth_element(s.begin(), s.begin() + 1000, s.end());
  const double median = s[1000];
  std::vector<int> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] >= median ? 1 : 0;
  EXPECT_NEAR(mi_gain(x, y), std::log(2.0), 0.1 * std::log(2.0));
}

TEST(MutualInformation, IndependentColumnNearZero) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> d;
  std::vector<double> x(2000);
  std::vector<int> y(2000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = d(rng);
    y[i] = static_cast<int>(rng() % 3);
  }
  EXPECT_LT(std::abs(mi_gain(x, y)), 0.05);
}

TEST(MutualInformation, MatchesQuadraticOracle) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> x(60);
    std::vector<int> y(60);
    for (std::size_t i = 0; i < x.size(); ++i) {
      y[i] = static_cast<int>(rng() % 3);
      x[i] = d(rng) + 0.7 * y[i];
    }
    y[0] = 7;  // singleton class is skipped by both
    EXPECT_NEAR(mi_gain(x, y, 3), mi_oracle(x, y, 3), 1e-12);
  }
}

TEST(MutualInformation, TooFewSamples) {
  std::vector<double> x{1, 2, 3, 4};
  std::vector<int> y{0, 1, 0, 1};
  EXPECT_THROW(mi_gain(x, y), ContractError);
}

TEST(ChiSquare, NullHypothesisRarelyRejected) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> d;
  int accepted = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(1000);
    std::vector<int> y(1000);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = d(rng);
      y[i] = static_cast<int>(rng() % 2);
    }
    accepted += chi_square(x, y).p_value > 0.05 ? 1 : 0;
  }
  EXPECT_GE(accepted, 90);
}

TEST(ChiSquare, PerfectSeparationTwoBins) {
  std::vector<double> x;
  std::vector<int> y;
  for (int i = 0; i < 50; ++i) {
    x.push_back(0.0);
    y.push_back(0);
    x.push_back(1.0);
    y.push_back(1);
  }
  const auto r = chi_square(x, y, 2);
  EXPECT_NEAR(r.statistic, 100.0, 1e-12);
  EXPECT_EQ(r.df, 1u);
  EXPECT_LT(r.p_value, 1e-20);
}

TEST(ChiSquare, TiedValuesCollapseBins) {
  std::vector<double> x;
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) {
    x.push_back(i < 30 ? 0.0 : 1.0);
    y.push_back(i % 2);
  }
  const auto r = chi_square(x, y, 10);
  EXPECT_EQ(r.bins, 2u);
}

TEST(ChiSquare, SingleBinIsAnError) {
  std::vector<double> x(20, 5.0);
  std::vector<int> y(20);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = static_cast<int>(i % 2);
  EXPECT_THROW(chi_square(x, y), DataError);
}

TEST(Fisher, IdenticalClassesScoreZero) {
  std::vector<double> x{1, 2, 3, 1, 2, 3};
  std::vector<int> y{0, 0, 0, 1, 1, 1};
  EXPECT_NEAR(fisher_score(x, y), 0.0, 1e-12);
}

TEST(Fisher, UnitSeparationQuarterVariance) {
  std::vector<double> x;
  std::vector<int> y;
  for (int i = 0; i < 10; ++i) {
    x.push_back(i % 2 ? 0.5 : -0.5);
    y.push_back(0);
    x.push_back(i % 2 ? 1.5 : 0.5);
    y.push_back(1);
  }
  EXPECT_NEAR(fisher_score(x, y), 1.0, 1e-12);
}

TEST(Fisher, ScaleInvariant) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> d;
  std::vector<double> x(50), x10(50);
  std::vector<int> y(50);
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = static_cast<int>(i % 3);
    x[i] = d(rng) + y[i];
    x10[i] = 10.0 * x[i];
  }
  EXPECT_NEAR(fisher_score(x10, y), fisher_score(x, y), 1e-12 * fisher_score(x, y));
}

TEST(Fisher, ZeroWithinVarianceIsInfinite) {
  std::vector<double> x{0, 0, 1, 1};
  std::vector<int> y{0, 0, 1, 1};
  EXPECT_TRUE(std::isinf(fisher_score(x, y)));
  std::vector<int> small{0, 1, 1, 1};
  EXPECT_THROW(fisher_score(x, small), DataError);
}

TEST(Pearson, SelfAndNegation) {
  std::vector<double> x{1, 4, 2, 8, 5};
  std::vector<double> neg(x.size());
  std::transform(x.begin(), x.end(), neg.begin(), [](double v) { return -v; });
  EXPECT_NEAR(pearson_corr(x, x), 1.0, 1e-15);
  EXPECT_NEAR(pearson_corr(x, neg), -1.0, 1e-15);
}

TEST(Pearson, MatchesMomentOracle) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> d;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(30), y(30);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = d(rng);
      y[i] = 0.3 * x[i] + d(rng);
    }
    const double n = 30.0;
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sx += x[i];
      sy += y[i];
      sxx += x[i] * x[i];
      syy += y[i] * y[i];
      sxy += x[i] * y[i];
    }
    const double cov = sxy / n - sx * sy / (n * n);
    const double r = cov / std::sqrt((sxx / n - sx * sx / (n * n)) * (syy / n - sy * sy / (n * n)));
    EXPECT_NEAR(pearson_corr(x, y), r, 1e-12);
  }
}

TEST(Pearson, ConstantInputIsAnError) {
  std::vector<double> x{1, 1, 1}, y{1, 2, 3};
  EXPECT_THROW(pearson_corr(x, y), DataError);
}

TEST(RankFeatures, DeterminingFeatureRanksFirst) {
  std::mt19937_64 rng(7);
  auto m = random_matrix(200, 5, rng);
  for (std::size_t i = 0; i < m.size(); ++i) m.rows[i][3] = m.labels[i] * 4.0 + 0.1 * m.rows[i][3];
  for (auto method : {ScoreMethod::mi, ScoreMethod::chi2, ScoreMethod::fisher, ScoreMethod::pearson}) {
    const auto ranked = rank_features(m, method);
    EXPECT_EQ(ranked.front().name, "f3") << to_string(method);
    for (std::size_t i = 1; i < ranked.size(); ++i) EXPECT_GE(ranked[i - 1].score, ranked[i].score);
  }
}

TEST(RankFeatures, DuplicatedColumnsScoreEqually) {
  std::mt19937_64 rng(8);
  auto m = random_matrix(100, 3, rng);
  m.column_names.push_back("copy");
  for (auto& r : m.rows) r.push_back(r[1]);
  for (auto method : {ScoreMethod::mi, ScoreMethod::chi2, ScoreMethod::fisher, ScoreMethod::pearson}) {
    const auto ranked = rank_features(m, method);
    double a = 0, b = 0;
    for (const auto& s : ranked) {
      if (s.name == "f1") a = s.score;
      if (s.name == "copy") b = s.score;
    }
    EXPECT_EQ(a, b);
  }
}

TEST(RankFeatures, InvariantUnderRowPermutation) {
  std::mt19937_64 rng(9);
  auto m = random_matrix(120, 4, rng);
  for (std::size_t i = 0; i < m.size(); ++i) m.rows[i][2] += 0.8 * m.labels[i];
  std::vector<std::size_t> perm(m.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  const auto shuffled = m.subset(perm);
  for (auto method : {ScoreMethod::mi, ScoreMethod::chi2, ScoreMethod::fisher, ScoreMethod::pearson}) {
    const auto a = rank_features(m, method);
    const auto b = rank_features(shuffled, method);
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].name, b[i].name);
      EXPECT_NEAR(a[i].score, b[i].score, 1e-9 * std::max(1.0, std::abs(a[i].score)));
    }
  }
}

TEST(AugmentPrevious, ZeroIsIdentity) {
  std::mt19937_64 rng(10);
  const auto m = random_matrix(7, 3, rng);
  const auto out = augment_previous(m, 0);
  EXPECT_EQ(out.rows, m.rows);
  EXPECT_EQ(out.column_names, m.column_names);
}

TEST(AugmentPrevious, GroupOfFiveWithTwoPrevious) {
  std::mt19937_64 rng(11);
  auto m = random_matrix(5, 4, rng);
  m.group_ids.assign(5, 42);
  const auto out = augment_previous(m, 2);
  EXPECT_EQ(out.size(), 3u);
  EXPECT_EQ(out.width(), 12u);
  EXPECT_EQ(out.column_names[4], "f0_prev1");
  EXPECT_EQ(out.column_names[8], "f0_prev2");
}

TEST(AugmentPrevious, PreviousBlocksMatchIndexLookup) {
  std::mt19937_64 rng(12);
  auto m = random_matrix(60, 3, rng);
  for (std::size_t i = 0; i < m.size(); ++i) m.group_ids.push_back(static_cast<std::int64_t>(rng() % 4));
  std::size_t dropped = 99;
  const auto out = augment_previous(m, 3, &dropped);
  EXPECT_EQ(dropped, 0u);
  for (std::size_t r = 0; r < out.size(); ++r) {
    const auto src = static_cast<std::size_t>(out.row_ids[r]);
    EXPECT_EQ(out.group_ids[r], m.group_ids[src]);
    // Walk back through the same group in the source to find each predecessor.
    std::size_t cur = src;
    for (std::size_t p = 1; p <= 3; ++p) {
      std::size_t prev = cur;
      do {
        --prev;
      } while (m.group_ids[prev] != m.group_ids[src]);
      for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(out.rows[r][p * 3 + j], m.rows[prev][j]);
      cur = prev;
    }
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(out.rows[r][j], m.rows[src][j]);
  }
}

TEST(AugmentPrevious, ShortGroupsDropped) {
  std::mt19937_64 rng(13);
  auto m = random_matrix(6, 2, rng);
  m.group_ids = {1, 1, 1, 1, 2, 2};
  std::size_t dropped = 0;
  const auto out = augment_previous(m, 2, &dropped);
  EXPECT_EQ(out.size(), 2u);
  EXPECT_EQ(dropped, 1u);
  EXPECT_THROW(augment_previous(m, 4), ConfigError);
}

TEST(NormalizeLength, PadTruncateIdentity) {
  std::vector<double> s144(144), s100(100), s200(200);
  std::iota(s144.begin(), s144.end(), 1.0);
  std::iota(s100.begin(), s100.end(), 1.0);
  std::iota(s200.begin(), s200.end(), 1.0);
  EXPECT_EQ(normalize_length(s144), s144);
  const auto padded = normalize_length(s100);
  ASSERT_EQ(padded.size(), 144u);
  EXPECT_TRUE(std::equal(s100.begin(), s100.end(), padded.begin()));
  EXPECT_TRUE(std::all_of(padded.begin() + 100, padded.end(), [](double v) { return v == 0.0; }));
  EXPECT_EQ(normalize_length(s200), std::vector<double>(s200.begin(), s200.begin() + 144));
  const auto sub = normalize_length(s200, 144, LengthMode::subsample);
  EXPECT_EQ(sub.size(), 144u);
  EXPECT_EQ(sub.front(), 1.0);
  EXPECT_THROW(normalize_length(std::vector<double>{}), DataError);
}

TEST(NormalizeLength, AlwaysTargetLength) {
  std::mt19937_64 rng(14);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> s(1 + rng() % 300, 1.0);
    const std::size_t target = 1 + rng() % 200;
    EXPECT_EQ(normalize_length(s, target).size(), target);
    EXPECT_EQ(normalize_length(s, target, LengthMode::subsample).size(), target);
  }
}

TEST(Standardize, MomentsAndConstantColumn) {
  std::mt19937_64 rng(15);
  auto m = random_matrix(80, 3, rng);
  for (auto& r : m.rows) {
    r[0] = 5.0 + 3.0 * r[0];
    r[2] = 7.0;
  }
  const auto s = standardize(m);
  for (std::size_t j = 0; j < 2; ++j) {
    const auto c = s.column(j);
    const double mean = std::accumulate(c.begin(), c.end(), 0.0) / 80.0;
    double var = 0;
    for (double v : c) var += (v - mean) * (v - mean);
    EXPECT_LT(std::abs(mean), 1e-12);
    EXPECT_NEAR(std::sqrt(var / 80.0), 1.0, 1e-9);
  }
  for (double v : s.column(2)) EXPECT_EQ(v, 0.0);
}

TEST(Standardize, StandardColumnUnchangedAndRoundTrip) {
  std::vector<std::vector<double>> rows{{-1.0, 2.0}, {1.0, 4.0}, {-1.0, 9.0}, {1.0, -3.0}};
  Standardizer fitted;
  FeatureMatrix m;
  m.column_names = {"a", "b"};
  m.rows = rows;
  m.labels = {0, 1, 0, 1};
  const auto s = standardize(m, &fitted);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_NEAR(s.rows[i][0], rows[i][0], 1e-9);
    const auto back = fitted.invert(s.rows[i]);
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(back[j], rows[i][j], 1e-9);
  }
}

TEST(Presets, NamesExistInBreathColumns) {
  const auto cols = breath_feature_columns();
  for (const auto& preset : {bsa_feature_preset(), dta_feature_preset()}) {
    EXPECT_EQ(preset.size(), 8u);
    for (const auto& n : preset) EXPECT_NE(std::find(cols.begin(), cols.end(), n), cols.end()) << n;
  }
}

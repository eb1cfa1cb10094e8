#include <gtest/gtest.h>

#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <random>

#include "lgan/error.hpp"
#include "lgan/stats/stats.hpp"
#include "published.hpp"
#include "range_mc.hpp"

using namespace lgan;
using namespace lgan::stats;

namespace {

std::vector<std::vector<double>> random_groups(std::size_t g, std::size_t lo, std::size_t hi, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  std::vector<std::vector<double>> out(g);
  for (std::size_t i = 0; i < g; ++i) {
    out[i].resize(lo + rng() % (hi - lo + 1));
    const double shift = 0.5 * d(rng);
    for (auto& v : out[i]) v = shift + d(rng);
  }
  return out;
}

double round_to(double v, int decimals) {
  const double s = std::pow(10.0, decimals);
  return std::round(v * s) / s;
}

// Two-sided Student t critical value times sqrt 2.
double t_identity(double alpha, double df) {
  boost::math::students_t_distribution<double> t(df);
  return std::sqrt(2.0) * boost::math::quantile(t, 1.0 - alpha / 2.0);
}

}  // namespace

TEST(Anova, PublishedRowsAreSelfConsistent) {
  for (const auto& [name, a] : lgan::testing::published_anovas()) {
    const auto t = anova_from_sums(a.ss_between, static_cast<std::size_t>(a.df_between), a.ss_within,
                                   static_cast<std::size_t>(a.df_within));
    EXPECT_EQ(round_to(t.ms_between, 6), a.ms_between) << name;
    EXPECT_EQ(round_to(t.ms_within, 6), a.ms_within) << name;
    EXPECT_NEAR(t.f, a.f, 0.01) << name;
    EXPECT_NEAR(f_pvalue(a.f, a.df_between, a.df_within), a.p, 5e-5) << name;
  }
}

TEST(Anova, IdenticalConstantGroups) {
  const std::vector<std::vector<double>> g{{2, 2, 2}, {2, 2}, {2, 2, 2, 2}};
  const auto t = one_way_anova(g);
  EXPECT_EQ(t.ss_between, 0.0);
  EXPECT_EQ(t.f, 0.0);
  EXPECT_EQ(t.p, 1.0);
}

TEST(Anova, MatchesDoubleLoopOracle) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = random_groups(3, 2, 12, rng);
    double sum = 0;
    std::size_t n = 0;
    for (const auto& grp : g) {
      for (double v : grp) {
        sum += v;
        ++n;
      }
    }
    const double grand = sum / static_cast<double>(n);
    double ssb = 0, ssw = 0, sst = 0;
    for (const auto& grp : g) {
      double m = 0;
      for (double v : grp) m += v;
      m /= static_cast<double>(grp.size());
      for (double v : grp) {
        ssb += (m - grand) * (m - grand);
        ssw += (v - m) * (v - m);
        sst += (v - grand) * (v - grand);
      }
    }
    const auto t = one_way_anova(g);
    EXPECT_NEAR(t.ss_between, ssb, 1e-10);
    EXPECT_NEAR(t.ss_within, ssw, 1e-10);
    EXPECT_NEAR(t.ss_between + t.ss_within, sst, 1e-9);
    EXPECT_EQ(t.df_between, 2u);
    EXPECT_EQ(t.df_within, n - 3);
    EXPECT_NEAR(t.ms_between, t.ss_between / 2.0, 1e-12);
    EXPECT_NEAR(t.ms_within, t.ss_within / static_cast<double>(n - 3), 1e-12);
    EXPECT_NEAR(t.f, t.ms_between / t.ms_within, 1e-12 * std::max(1.0, t.f));
    EXPECT_GE(t.p, 0.0);
    EXPECT_LE(t.p, 1.0);
  }
}

TEST(Anova, ShiftInvariant) {
  std::mt19937_64 rng(2);
  auto g = random_groups(4, 3, 8, rng);
  const auto a = one_way_anova(g);
  for (auto& grp : g) {
    for (auto& v : grp) v += 1234.5;
  }
  const auto b = one_way_anova(g);
  EXPECT_NEAR(a.ss_between, b.ss_between, 1e-9);
  EXPECT_NEAR(a.ss_within, b.ss_within, 1e-9);
}

TEST(Anova, SmallGroupIsAnError) {
  const std::vector<std::vector<double>> g{{1, 2}, {3}};
  EXPECT_THROW(one_way_anova(g), DataError);
}

TEST(FPvalue, ReferenceValues) {
  EXPECT_NEAR(f_pvalue(5.151234, 5, 54), 0.00061842, 1e-8);
  EXPECT_NEAR(f_pvalue(8.111778, 3, 36), 0.00029580, 1e-8);
  EXPECT_NEAR(f_pvalue(129.0, 5, 54) / 9.466e-29, 1.0, 1e-3);
  EXPECT_EQ(f_pvalue(0.0, 3, 10), 1.0);
  EXPECT_THROW(f_pvalue(1.0, 0, 10), ContractError);
}

TEST(FPvalue, MonotoneDecreasing) {
  double prev = 1.0;
  for (double f = 0.05; f < 40; f += 0.05) {
    const double p = f_pvalue(f, 4, 20);
    EXPECT_LT(p, prev);
    prev = p;
  }
}

TEST(StudentizedRange, ReferenceQuantiles) {
  // 0.95 quantiles, k = 2, 3, 4, 6 by df = 10, 30, 54.
  const double ref[4][3] = {{3.151064, 2.888209, 2.835327},
                            {3.876777, 3.486420, 3.408232},
                            {4.326582, 3.845401, 3.748904},
                            {4.912016, 4.301464, 4.178265}};
  const std::size_t ks[] = {2, 3, 4, 6};
  const double dfs[] = {10, 30, 54};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(studentized_range_quantile(0.05, ks[i], dfs[j]), ref[i][j], 2e-6);
  }
}

TEST(StudentizedRange, TwoGroupTIdentity) {
  for (double df : {3.0, 10.0, 30.0, 54.0, 200.0}) {
    for (double alpha : {0.01, 0.05, 0.1}) {
      EXPECT_NEAR(studentized_range_quantile(alpha, 2, df), t_identity(alpha, df), 1e-6) << df << " " << alpha;
    }
  }
}

TEST(StudentizedRange, IncreasesWithK) {
  double prev = 0.0;
  for (std::size_t k = 2; k <= 8; ++k) {
    const double q = studentized_range_quantile(0.05, k, 20);
    EXPECT_GT(q, prev);
    prev = q;
  }
}

TEST(StudentizedRange, CdfShape) {
  EXPECT_EQ(studentized_range_cdf(0.0, 3, 10), 0.0);
  double prev = 0.0;
  for (double q = 0.25; q < 10; q += 0.25) {
    const double c = studentized_range_cdf(q, 4, 12);
    EXPECT_GE(c, prev);
    EXPECT_LE(c, 1.0);
    prev = c;
  }
  EXPECT_NEAR(studentized_range_cdf(studentized_range_quantile(0.05, 5, 15), 5, 15), 0.95, 1e-9);
}

TEST(StudentizedRange, MonteCarloTenMillionDraws) {
  const double mc = lgan::testing::studentized_range_mc_quantile(0.05, 3, 10, 10'000'000, 77);
  EXPECT_NEAR(studentized_range_quantile(0.05, 3, 10) / mc, 1.0, 0.01);
}

TEST(Tukey, IdenticalGroups) {
  const std::vector<NamedGroup> g{{"a", {1, 2, 3, 4}}, {"b", {1, 2, 3, 4}}};
  const auto rows = tukey_hsd(g);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].meandiff, 0.0);
  EXPECT_FALSE(rows[0].reject);
  EXPECT_NEAR(rows[0].p_adj, 1.0, 1e-6);
}

TEST(Tukey, ConstructedSeparation) {
  const std::vector<NamedGroup> g{{"near1", {0, 0, 0, 0}}, {"far", {10, 10, 10, 10.001}}, {"near2", {0.001, 0, 0, 0}}};
  const auto rows = tukey_hsd(g);
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& r : rows) {
    const bool involves_far = r.group1 == "far" || r.group2 == "far";
    EXPECT_EQ(r.reject, involves_far) << r.group1 << "/" << r.group2;
  }
  // Name order: far < near1 < near2.
  EXPECT_EQ(rows[0].group1, "far");
  EXPECT_EQ(rows[0].group2, "near1");
  EXPECT_LT(rows[0].meandiff, 0.0);
}

TEST(Tukey, TripleEquivalenceOnRandomConfigurations) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto raw = random_groups(2 + rng() % 4, 3, 10, rng);
    std::vector<NamedGroup> g;
    for (std::size_t i = 0; i < raw.size(); ++i) g.push_back({"g" + std::to_string(i), raw[i]});
    for (const auto& r : tukey_hsd(g)) {
      const bool excludes_zero = r.lower > 0.0 || r.upper < 0.0;
      EXPECT_EQ(r.reject, excludes_zero);
      EXPECT_EQ(r.reject, r.p_adj < 0.05);
      EXPECT_LE(r.lower, r.meandiff);
      EXPECT_LE(r.meandiff, r.upper);
    }
  }
}

TEST(Tukey, UnequalSizesUseKramerStandardError) {
  const std::vector<NamedGroup> g{{"a", {1, 2, 3}}, {"b", {2, 3, 4, 5, 6, 7}}, {"c", {0, 1}}};
  const auto rows = tukey_hsd(g);
  std::vector<std::vector<double>> raw{g[0].values, g[1].values, g[2].values};
  const auto t = one_way_anova(raw);
  const double q = studentized_range_quantile(0.05, 3, static_cast<double>(t.df_within));
  const double half = q * std::sqrt(t.ms_within / 2.0 * (1.0 / 3.0 + 1.0 / 6.0));
  EXPECT_NEAR(rows[0].upper - rows[0].meandiff, half, 1e-12);
  EXPECT_NEAR(rows[0].meandiff, 4.5 - 2.0, 1e-12);
}

TEST(Tukey, ZeroPooledVariance) {
  const std::vector<NamedGroup> g{{"a", {1, 1}}, {"b", {2, 2}}};
  EXPECT_THROW(tukey_hsd(g), DataError);
}

TEST(Render, PublishedLayouts) {
  const auto t = anova_from_sums(0.005816, 5, 0.012194, 54);
  const auto text = render_anova_text(t);
  EXPECT_NE(text.find("Sums of Squares (SS)"), std::string::npos);
  EXPECT_NE(text.find("Error (or Residual)"), std::string::npos);
  EXPECT_NE(text.find("NaN"), std::string::npos);
  EXPECT_NE(text.find("0.005816"), std::string::npos);
  const std::vector<TukeyRow> rows{{"ConvLSTM", "LGAN", 1.5926, 0.0016, 1.0706, 2.1145, true}};
  const auto tt = render_tukey_text(rows);
  EXPECT_NE(tt.find("group1"), std::string::npos);
  EXPECT_NE(tt.find("p-adj"), std::string::npos);
  EXPECT_NE(tt.find("True"), std::string::npos);
  EXPECT_NE(render_tukey_kv(rows).find("pair.0.reject=true"), std::string::npos);
  EXPECT_NE(render_anova_kv(t).find("df_within=54"), std::string::npos);
}

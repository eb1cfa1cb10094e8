#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lgan::stats {

struct AnovaTable {
  double ss_between = 0.0;
  double ss_within = 0.0;
  std::size_t df_between = 0;
  std::size_t df_within = 0;
  double ms_between = 0.0;
  double ms_within = 0.0;
  double f = 0.0;
  double p = 1.0;
};

/// Classical one-way decomposition. Every group needs at least two values.
AnovaTable one_way_anova(std::span<const std::vector<double>> groups);

/// Completes a table from its sums of squares and degrees of freedom.
AnovaTable anova_from_sums(double ss_between, std::size_t df_between, double ss_within, std::size_t df_within);

/// Upper tail of the F(df1, df2) distribution at f.
double f_pvalue(double f, double df1, double df2);

/// P(Q <= q) for the range of k standard normals divided by an independent
/// sqrt(chi^2_df / df).
double studentized_range_cdf(double q, std::size_t k, double df);

/// The (1 - alpha) quantile of the studentized range.
double studentized_range_quantile(double alpha, std::size_t k, double df);

struct NamedGroup {
  std::string name;
  std::vector<double> values;
};

struct TukeyRow {
  std::string group1;
  std::string group2;
  double meandiff = 0.0;  // mean(group2) - mean(group1)
  double p_adj = 1.0;
  double lower = 0.0;
  double upper = 0.0;
  bool reject = false;
};

/// Tukey-Kramer all-pairs comparison. Groups are ordered by name and each
/// pair (i < j) yields one row.
std::vector<TukeyRow> tukey_hsd(std::span<const NamedGroup> groups, double alpha = 0.05);

/// `%.6g` with NaN spelled as in the published layout.
std::string format_sig6(double v);

std::string render_anova_text(const AnovaTable& t);
std::string render_anova_kv(const AnovaTable& t, const std::string& prefix = "");
std::string render_tukey_text(std::span<const TukeyRow> rows, double alpha = 0.05);
std::string render_tukey_kv(std::span<const TukeyRow> rows, const std::string& prefix = "");

}  // namespace lgan::stats

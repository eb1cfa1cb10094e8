#include "lgan/stats/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "lgan/error.hpp"

namespace lgan::stats {

namespace {

using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;

constexpr double kQuadTol = 1e-10;
constexpr double kMaxQuadError = 1e-8;

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

template <class F>
double integrate(F f, double a, double b) {
  double err = 0.0;
  const double v = Quad::integrate(f, a, b, 15, kQuadTol, &err);
  if (!std::isfinite(v) || err > kMaxQuadError) {
    throw NumericalError("studentized range quadrature did not converge (error estimate " + std::to_string(err) + ")");
  }
  return v;
}

// P(range of k standard normals <= w).
double normal_range_cdf(double w, std::size_t k) {
  if (w <= 0.0) return 0.0;
  const double km1 = static_cast<double>(k - 1);
  auto inner = [&](double z) {
    const double d = normal_cdf(z) - normal_cdf(z - w);
    return d <= 0.0 ? 0.0 : normal_pdf(z) * std::pow(d, km1);
  };
  // The integrand vanishes below z = -8.5 and above w + 8.5; split at the two
  // points where its shape changes.
  const double lo = -8.5, hi = std::min(8.5, w + 8.5);
  const double mid = std::clamp(0.5 * w, lo, hi);
  const double v = static_cast<double>(k) * (integrate(inner, lo, mid) + integrate(inner, mid, hi));
  return std::clamp(v, 0.0, 1.0);
}

// Density of s = sqrt(chi^2_df / df).
double scaled_chi_pdf(double s, double df) {
  if (s <= 0.0) return 0.0;
  const double log_c = 0.5 * df * std::log(df) - std::lgamma(0.5 * df) - (0.5 * df - 1.0) * std::numbers::ln2;
  return std::exp(log_c + (df - 1.0) * std::log(s) - 0.5 * df * s * s);
}

}  // namespace

AnovaTable anova_from_sums(double ss_between, std::size_t df_between, double ss_within, std::size_t df_within) {
  if (df_between == 0 || df_within == 0) throw ContractError("ANOVA degrees of freedom must be positive");
  AnovaTable t;
  t.ss_between = ss_between;
  t.ss_within = ss_within;
  t.df_between = df_between;
  t.df_within = df_within;
  t.ms_between = ss_between / static_cast<double>(df_between);
  t.ms_within = ss_within / static_cast<double>(df_within);
  if (t.ms_within > 0.0) {
    t.f = t.ms_between / t.ms_within;
    t.p = f_pvalue(t.f, static_cast<double>(df_between), static_cast<double>(df_within));
  } else {
    t.f = t.ms_between > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    t.p = t.ms_between > 0.0 ? 0.0 : 1.0;
  }
  return t;
}

AnovaTable one_way_anova(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) throw ContractError("one-way ANOVA needs at least two groups");
  double grand = 0.0;
  std::size_t n = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].size() < 2) throw DataError("ANOVA group " + std::to_string(g) + " has fewer than 2 values");
    for (double v : groups[g]) {
      if (!std::isfinite(v)) throw DataError("ANOVA group " + std::to_string(g) + " holds a non-finite value");
      grand += v;
    }
    n += groups[g].size();
  }
  grand /= static_cast<double>(n);
  double ssb = 0.0, ssw = 0.0;
  for (const auto& g : groups) {
    const double m = mean_of(g);
    ssb += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double v : g) ssw += (v - m) * (v - m);
  }
  return anova_from_sums(ssb, groups.size() - 1, ssw, n - groups.size());
}

double f_pvalue(double f, double df1, double df2) {
  if (!(df1 >= 1.0) || !(df2 >= 1.0)) throw ContractError("F distribution degrees of freedom must be >= 1");
  if (std::isnan(f) || f < 0.0) throw ContractError("F statistic must be non-negative");
  if (f == 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return boost::math::cdf(boost::math::complement(boost::math::fisher_f_distribution<double>(df1, df2), f));
}

double studentized_range_cdf(double q, std::size_t k, double df) {
  if (k < 2) throw ContractError("studentized range needs k >= 2");
  if (!(df >= 1.0)) throw ContractError("studentized range needs df >= 1");
  if (q <= 0.0) return 0.0;
  if (std::isinf(q)) return 1.0;
  if (df > 1e5) return normal_range_cdf(q, k);
  auto outer = [&](double s) { return scaled_chi_pdf(s, df) * normal_range_cdf(q * s, k); };
  // s concentrates around 1 with spread about 1/sqrt(2 df).
  const double spread = 1.0 / std::sqrt(2.0 * df);
  const double upper = 1.0 + 40.0 * spread + 10.0;
  const double v = integrate(outer, 0.0, 1.0) + integrate(outer, 1.0, upper);
  return std::clamp(v, 0.0, 1.0);
}

double studentized_range_quantile(double alpha, std::size_t k, double df) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ContractError("alpha must lie in (0, 1)");
  if (df < 2.0) throw ContractError("studentized range quantile needs df >= 2");
  const double target = 1.0 - alpha;
  double lo = 0.0, hi = 1.0;
  while (studentized_range_cdf(hi, k, df) < target) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e4) throw NumericalError("studentized range quantile bracket failed");
  }
  auto f = [&](double q) { return studentized_range_cdf(q, k, df) - target; };
  std::uintmax_t iters = 100;
  const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(40), iters);
  return 0.5 * (a + b);
}

std::vector<TukeyRow> tukey_hsd(std::span<const NamedGroup> groups, double alpha) {
  if (groups.size() < 2) throw ContractError("Tukey HSD needs at least two groups");
  std::vector<NamedGroup> sorted(groups.begin(), groups.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const NamedGroup& a, const NamedGroup& b) { return a.name < b.name; });
  std::vector<std::vector<double>> values;
  for (const auto& g : sorted) values.push_back(g.values);
  const auto anova = one_way_anova(values);
  if (!(anova.ms_within > 0.0)) throw DataError("Tukey HSD needs a positive pooled within-group variance");

  const std::size_t k = sorted.size();
  const double df = static_cast<double>(anova.df_within);
  const double q_crit = studentized_range_quantile(alpha, k, df);
  std::vector<TukeyRow> rows;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double ni = static_cast<double>(sorted[i].values.size());
      const double nj = static_cast<double>(sorted[j].values.size());
      const double se = std::sqrt(anova.ms_within / 2.0 * (1.0 / ni + 1.0 / nj));
      TukeyRow r;
      r.group1 = sorted[i].name;
      r.group2 = sorted[j].name;
      r.meandiff = mean_of(sorted[j].values) - mean_of(sorted[i].values);
      r.lower = r.meandiff - q_crit * se;
      r.upper = r.meandiff + q_crit * se;
      r.p_adj = std::clamp(1.0 - studentized_range_cdf(std::abs(r.meandiff) / se, k, df), 0.0, 1.0);
      r.reject = r.p_adj < alpha;
      rows.push_back(r);
    }
  }
  return rows;
}

std::string format_sig6(double v) {
  if (std::isnan(v)) return "NaN";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

namespace {

std::string pad(const std::string& s, std::size_t w) {
  return s.size() >= w ? s + " " : s + std::string(w - s.size(), ' ');
}

std::string full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string render_anova_text(const AnovaTable& t) {
  std::ostringstream out;
  const std::size_t w0 = 22, w = 24;
  out << pad("Source of Variation", w0) << pad("Sums of Squares (SS)", w) << pad("Degrees Freedom (df)", w)
      << pad("Means Squares (MS)", w) << pad("F", 12) << "PR(>F)\n";
  out << pad("Between networks", w0) << pad(format_sig6(t.ss_between), w) << pad(std::to_string(t.df_between), w)
      << pad(format_sig6(t.ms_between), w) << pad(format_sig6(t.f), 12) << format_sig6(t.p) << '\n';
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out << pad("Error (or Residual)", w0) << pad(format_sig6(t.ss_within), w) << pad(std::to_string(t.df_within), w)
      << pad(format_sig6(t.ms_within), w) << pad(format_sig6(nan), 12) << format_sig6(nan) << '\n';
  return out.str();
}

std::string render_anova_kv(const AnovaTable& t, const std::string& prefix) {
  std::ostringstream out;
  out << prefix << "ss_between=" << full(t.ss_between) << '\n'
      << prefix << "df_between=" << t.df_between << '\n'
      << prefix << "ms_between=" << full(t.ms_between) << '\n'
      << prefix << "ss_within=" << full(t.ss_within) << '\n'
      << prefix << "df_within=" << t.df_within << '\n'
      << prefix << "ms_within=" << full(t.ms_within) << '\n'
      << prefix << "f=" << full(t.f) << '\n'
      << prefix << "p=" << full(t.p) << '\n';
  return out.str();
}

std::string render_tukey_text(std::span<const TukeyRow> rows, double alpha) {
  std::size_t w = 10;
  for (const auto& r : rows) w = std::max({w, r.group1.size() + 2, r.group2.size() + 2});
  std::ostringstream out;
  out << "Multiple Comparison of Means - Tukey HSD, FWER=" << format_sig6(alpha) << '\n';
  out << pad("group1", w) << pad("group2", w) << pad("meandiff", 12) << pad("p-adj", 12) << pad("lower", 12)
      << pad("upper", 12) << "reject\n";
  for (const auto& r : rows) {
    out << pad(r.group1, w) << pad(r.group2, w) << pad(format_sig6(r.meandiff), 12) << pad(format_sig6(r.p_adj), 12)
        << pad(format_sig6(r.lower), 12) << pad(format_sig6(r.upper), 12) << (r.reject ? "True" : "False") << '\n';
  }
  return out.str();
}

std::string render_tukey_kv(std::span<const TukeyRow> rows, const std::string& prefix) {
  std::ostringstream out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const std::string k = prefix + "pair." + std::to_string(i) + '.';
    out << k << "group1=" << r.group1 << '\n'
        << k << "group2=" << r.group2 << '\n'
        << k << "meandiff=" << full(r.meandiff) << '\n'
        << k << "p_adj=" << full(r.p_adj) << '\n'
        << k << "lower=" << full(r.lower) << '\n'
        << k << "upper=" << full(r.upper) << '\n'
        << k << "reject=" << (r.reject ? "true" : "false") << '\n';
  }
  return out.str();
}

}  // namespace lgan::stats

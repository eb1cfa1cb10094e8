#include "lgan/eval/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>

#include "lgan/error.hpp"

namespace lgan::eval {

namespace {

std::map<int, std::vector<std::size_t>> rows_by_class(std::span<const int> labels) {
  std::map<int, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < labels.size(); ++i) out[labels[i]].push_back(i);
  return out;
}

Metric ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::vector<std::size_t> FoldPlan::training_rows(std::size_t f) const {
  if (f >= folds.size()) throw ContractError("fold index out of range");
  std::vector<std::size_t> out;
  for (std::size_t g = 0; g < folds.size(); ++g) {
    if (g != f) out.insert(out.end(), folds[g].begin(), folds[g].end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

FoldPlan kfold_split(std::size_t n, std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (labels.size() != n) throw DimensionError("kfold_split: label count differs from n");
  if (k < 2) throw ContractError("kfold_split needs k >= 2");
  const auto classes = rows_by_class(labels);
  for (const auto& [label, rows] : classes) {
    if (rows.size() < k) {
      throw ContractError("kfold_split: k=" + std::to_string(k) + " exceeds the " + std::to_string(rows.size()) +
                          " rows of class " + std::to_string(label));
    }
  }
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.folds.assign(k, {});
  std::mt19937_64 rng(seed);
  std::size_t deal = 0;
  for (auto [label, rows] : classes) {
    std::shuffle(rows.begin(), rows.end(), rng);
    for (std::size_t r : rows) plan.folds[deal++ % k].push_back(r);
  }
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());
  return plan;
}

HoldoutSplit holdout_split(std::span<const int> labels, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test fraction must lie in (0, 1)");
  HoldoutSplit split;
  std::mt19937_64 rng(seed);
  for (auto [label, rows] : rows_by_class(labels)) {
    std::shuffle(rows.begin(), rows.end(), rng);
    auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(rows.size())));
    if (n_test == 0 && rows.size() >= 2) n_test = 1;
    if (n_test >= rows.size()) n_test = rows.size() - 1;
    split.test.insert(split.test.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train.insert(split.train.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_test), rows.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (const auto& row : counts) {
    for (auto c : row) t += c;
  }
  return t;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) t += counts[i][i];
  return t;
}

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth,
                          std::span<const std::string> class_names) {
  if (predicted.size() != truth.size()) throw DimensionError("confusion: prediction and truth lengths differ");
  const std::size_t c = class_names.size();
  ConfusionMatrix m;
  m.class_names.assign(class_names.begin(), class_names.end());
  m.counts.assign(c, std::vector<std::uint64_t>(c, 0));
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    for (int v : {predicted[i], truth[i]}) {
      if (v < 0 || static_cast<std::size_t>(v) >= c) {
        throw DataError("confusion: unknown class id " + std::to_string(v) + " at record " + std::to_string(i));
      }
    }
    ++m.counts[static_cast<std::size_t>(predicted[i])][static_cast<std::size_t>(truth[i])];
  }
  return m;
}

const char* to_string(CollapseMode m) { return m == CollapseMode::literal ? "literal" : "conventional"; }

CollapseMode parse_collapse_mode(const std::string& s) {
  if (s == "literal") return CollapseMode::literal;
  if (s == "conventional") return CollapseMode::conventional;
  throw ConfigError("unknown collapse mode '" + s + "' (expected literal or conventional)");
}

BinaryCounts binary_collapse(const ConfusionMatrix& m, std::size_t positive, CollapseMode mode) {
  if (positive >= m.classes()) throw ContractError("binary_collapse: positive class out of range");
  BinaryCounts b;
  std::uint64_t pred_pos_true_other = 0, pred_other_true_pos = 0;
  for (std::size_t p = 0; p < m.classes(); ++p) {
    for (std::size_t t = 0; t < m.classes(); ++t) {
      const auto c = m.counts[p][t];
      if (p == positive && t == positive) {
        b.tp += c;
      } else if (p == positive) {
        pred_pos_true_other += c;
      } else if (t == positive) {
        pred_other_true_pos += c;
      } else {
        b.tn += c;
      }
    }
  }
  if (mode == CollapseMode::literal) {
    b.fn = pred_pos_true_other;
    b.fp = pred_other_true_pos;
  } else {
    b.fp = pred_pos_true_other;
    b.fn = pred_other_true_pos;
  }
  return b;
}

Metrics metrics(const BinaryCounts& c) {
  Metrics m;
  m.accuracy = ratio(c.tp + c.tn, c.total());
  m.sensitivity = ratio(c.tp, c.tp + c.fn);
  m.specificity = ratio(c.tn, c.tn + c.fp);
  m.fpr = ratio(c.fp, c.fp + c.tn);
  m.precision = ratio(c.tp, c.tp + c.fp);
  return m;
}

double multiclass_accuracy(const ConfusionMatrix& m) {
  const auto total = m.total();
  if (total == 0) throw DataError("multiclass_accuracy on an empty confusion matrix");
  return static_cast<double>(m.trace()) / static_cast<double>(total);
}

std::string format_metric(const Metric& v, int precision) {
  if (!v) return "undefined";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, *v);
  return buf;
}

std::string render_report_text(const ConfusionMatrix& m, CollapseMode mode) {
  std::size_t w = 16;
  for (const auto& n : m.class_names) w = std::max(w, n.size() + 2);
  auto pad = [](const std::string& s, std::size_t width) {
    return s.size() >= width ? s + " " : std::string(width - s.size(), ' ') + s;
  };
  std::ostringstream out;
  out << pad("Predicted \\ True", w);
  for (const auto& n : m.class_names) out << pad(n, w);
  out << '\n';
  for (std::size_t p = 0; p < m.classes(); ++p) {
    out << pad(m.class_names[p], w);
    for (auto c : m.counts[p]) out << pad(std::to_string(c), w);
    out << '\n';
  }
  out << '\n' << pad("Accuracy", w) << pad(format_metric(multiclass_accuracy(m), 4), w) << "\n\n";
  out << pad("Positive", w);
  for (const char* h : {"TP", "FN", "FP", "TN", "Accuracy", "Sensitivity", "Specificity", "FPR", "Precision"}) {
    out << pad(h, 12);
  }
  out << '\n';
  for (std::size_t p = 0; p < m.classes(); ++p) {
    const auto b = binary_collapse(m, p, mode);
    const auto r = metrics(b);
    out << pad(m.class_names[p], w);
    for (auto v : {b.tp, b.fn, b.fp, b.tn}) out << pad(std::to_string(v), 12);
    for (const auto& v : {r.accuracy, r.sensitivity, r.specificity, r.fpr, r.precision}) out << pad(format_metric(v, 4), 12);
    out << '\n';
  }
  out << "(binary counts use the " << to_string(mode) << " collapse)\n";
  return out.str();
}

std::string render_report_kv(const ConfusionMatrix& m, CollapseMode mode, const std::string& prefix) {
  std::ostringstream out;
  out << prefix << "collapse=" << to_string(mode) << '\n';
  out << prefix << "total=" << m.total() << '\n';
  out << prefix << "accuracy=" << format_metric(multiclass_accuracy(m), 17) << '\n';
  for (std::size_t p = 0; p < m.classes(); ++p) {
    for (std::size_t t = 0; t < m.classes(); ++t) {
      out << prefix << "confusion." << m.class_names[p] << '.' << m.class_names[t] << '=' << m.counts[p][t] << '\n';
    }
  }
  for (std::size_t p = 0; p < m.classes(); ++p) {
    const auto b = binary_collapse(m, p, mode);
    const auto r = metrics(b);
    const std::string k = prefix + "class." + m.class_names[p] + '.';
    out << k << "tp=" << b.tp << '\n' << k << "fn=" << b.fn << '\n' << k << "fp=" << b.fp << '\n' << k << "tn=" << b.tn << '\n';
    out << k << "accuracy=" << format_metric(r.accuracy, 17) << '\n';
    out << k << "sensitivity=" << format_metric(r.sensitivity, 17) << '\n';
    out << k << "specificity=" << format_metric(r.specificity, 17) << '\n';
    out << k << "fpr=" << format_metric(r.fpr, 17) << '\n';
    out << k << "precision=" << format_metric(r.precision, 17) << '\n';
  }
  return out.str();
}

}  // namespace lgan::eval

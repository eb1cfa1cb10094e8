#include "lgan/io/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "lgan/error.hpp"

namespace lgan::io {

namespace {

constexpr std::size_t kEcgMaxSamples = 187;
constexpr std::size_t kEcgSamples = 144;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string where(const std::string& source, std::size_t line) { return source + ":" + std::to_string(line); }

double parse_double(const std::string& cell, const std::string& source, std::size_t line, const std::string& column) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
    throw DataError(where(source, line) + ": column '" + column + "' holds '" + cell + "', not a finite number");
  }
  return v;
}

long long parse_integer(const std::string& cell, const std::string& source, std::size_t line, const std::string& column) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw DataError(where(source, line) + ": column '" + column + "' holds '" + cell + "', not an integer");
  }
  return v;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> breath_class_names() { return {"Normal", "BSA", "DTA"}; }

features::FeatureMatrix read_breath_csv(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw DataError(source + ": missing header row");
  const auto header = split_cells(line);
  std::map<std::string, std::size_t> position;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (!position.emplace(header[j], j).second) throw DataError(source + ": duplicate column '" + header[j] + "'");
  }
  auto require = [&](const std::string& name) {
    const auto it = position.find(name);
    if (it == position.end()) throw DataError(source + ": missing required column '" + name + "'");
    return it->second;
  };
  features::FeatureMatrix m;
  m.column_names = features::breath_feature_columns();
  m.class_names = breath_class_names();
  std::vector<std::size_t> feature_pos;
  for (const auto& name : m.column_names) feature_pos.push_back(require(name));
  const std::size_t patient_pos = require("patient_id");
  const std::size_t label_pos = require("label");
  std::map<std::string, int> label_index;
  for (std::size_t c = 0; c < m.class_names.size(); ++c) label_index[m.class_names[c]] = static_cast<int>(c);

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_cells(line);
    if (cells.size() != header.size()) {
      throw DataError(where(source, line_no) + ": expected " + std::to_string(header.size()) + " cells, found " +
                      std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(feature_pos.size());
    for (std::size_t j = 0; j < feature_pos.size(); ++j) {
      row.push_back(parse_double(cells[feature_pos[j]], source, line_no, m.column_names[j]));
    }
    const auto label = label_index.find(cells[label_pos]);
    if (label == label_index.end()) {
      throw DataError(where(source, line_no) + ": unknown label '" + cells[label_pos] + "' (expected Normal, BSA or DTA)");
    }
    m.rows.push_back(std::move(row));
    m.labels.push_back(label->second);
    m.group_ids.push_back(parse_integer(cells[patient_pos], source, line_no, "patient_id"));
    m.row_ids.push_back(static_cast<std::int64_t>(m.rows.size() - 1));
  }
  return m;
}

features::FeatureMatrix load_breath_csv(const std::string& path) {
  auto in = open_input(path);
  return read_breath_csv(in, path);
}

void write_breath_csv(const features::FeatureMatrix& m, std::ostream& out) {
  m.validate();
  for (const auto& name : m.column_names) {
    if (name.find(',') != std::string::npos) throw DataError("column name '" + name + "' contains a comma");
    out << name << ',';
  }
  out << "patient_id,label\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (double v : m.rows[i]) out << format_double(v) << ',';
    const auto label = static_cast<std::size_t>(m.labels[i]);
    if (label >= m.class_names.size()) throw DataError("row " + std::to_string(i) + " has no class name");
    out << (m.group_ids.empty() ? 0 : m.group_ids[i]) << ',' << m.class_names[label] << '\n';
  }
  if (!out) throw DataError("failed writing breath table");
}

void save_breath_csv(const features::FeatureMatrix& m, const std::string& path) {
  auto out = open_output(path);
  write_breath_csv(m, out);
}

const char* to_string(EcgLabelSet s) { return s == EcgLabelSet::mitbih ? "mitbih" : "ptb"; }

EcgLabelSet parse_ecg_label_set(const std::string& s) {
  if (s == "mitbih") return EcgLabelSet::mitbih;
  if (s == "ptb") return EcgLabelSet::ptb;
  throw ConfigError("unknown ECG label set '" + s + "' (expected mitbih or ptb)");
}

std::vector<std::string> ecg_class_names(EcgLabelSet set) {
  if (set == EcgLabelSet::mitbih) return {"N", "S", "V", "F", "Q"};
  return {"normal", "abnormal"};
}

features::FeatureMatrix read_ecg_csv(std::istream& in, EcgLabelSet set, const std::string& source,
                                     features::LengthMode mode) {
  features::FeatureMatrix m;
  for (std::size_t j = 0; j < kEcgSamples; ++j) m.column_names.push_back("s" + std::to_string(j));
  m.class_names = ecg_class_names(set);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_cells(line);
    if (cells.size() < 2) throw DataError(where(source, line_no) + ": a row needs samples and a label");
    if (cells.size() - 1 > kEcgMaxSamples) {
      throw DataError(where(source, line_no) + ": " + std::to_string(cells.size() - 1) + " samples exceed the " +
                      std::to_string(kEcgMaxSamples) + "-sample limit");
    }
    std::vector<double> samples;
    samples.reserve(cells.size() - 1);
    for (std::size_t j = 0; j + 1 < cells.size(); ++j) {
      samples.push_back(parse_double(cells[j], source, line_no, "sample " + std::to_string(j)));
    }
    // Integer codes are often written as floats ("1.0").
    const double code = parse_double(cells.back(), source, line_no, "label");
    if (code != std::floor(code) || code < 0 || code >= static_cast<double>(m.class_names.size())) {
      throw DataError(where(source, line_no) + ": unknown label code '" + cells.back() + "' for the " + to_string(set) +
                      " label set");
    }
    m.rows.push_back(features::normalize_length(samples, kEcgSamples, mode));
    m.labels.push_back(static_cast<int>(code));
    m.row_ids.push_back(static_cast<std::int64_t>(m.rows.size() - 1));
  }
  return m;
}

features::FeatureMatrix load_ecg_csv(const std::string& path, EcgLabelSet set, features::LengthMode mode) {
  auto in = open_input(path);
  return read_ecg_csv(in, set, path, mode);
}

void write_ecg_csv(const features::FeatureMatrix& m, std::ostream& out) {
  m.validate();
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (double v : m.rows[i]) out << format_double(v) << ',';
    out << m.labels[i] << '\n';
  }
  if (!out) throw DataError("failed writing ECG table");
}

void save_ecg_csv(const features::FeatureMatrix& m, const std::string& path) {
  auto out = open_output(path);
  write_ecg_csv(m, out);
}

}  // namespace lgan::io

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lgan/features/matrix.hpp"
#include "lgan/features/preprocess.hpp"

namespace lgan::io {

/// Breath labels, in label-index order.
std::vector<std::string> breath_class_names();

/// Breath metadata table: the eleven feature columns (any order), a
/// `patient_id` integer column and a `label` column in {Normal, BSA, DTA}.
/// Columns come back in canonical order, group ids are the patient ids and
/// row ids count data rows from 0. `source` names the input in errors.
features::FeatureMatrix read_breath_csv(std::istream& in, const std::string& source = "<stream>");
features::FeatureMatrix load_breath_csv(const std::string& path);

/// Writes every column of `m` plus `patient_id` and `label`, values with 17
/// significant digits. Rows without group ids get patient 0.
void write_breath_csv(const features::FeatureMatrix& m, std::ostream& out);
void save_breath_csv(const features::FeatureMatrix& m, const std::string& path);

enum class EcgLabelSet { mitbih, ptb };

const char* to_string(EcgLabelSet s);
EcgLabelSet parse_ecg_label_set(const std::string& s);

/// {N, S, V, F, Q} or {normal, abnormal}.
std::vector<std::string> ecg_class_names(EcgLabelSet set);

/// Headerless rows of up to 187 samples followed by an integer class code.
/// Every row is normalized to 144 samples (columns s0..s143).
features::FeatureMatrix read_ecg_csv(std::istream& in, EcgLabelSet set, const std::string& source = "<stream>",
                                     features::LengthMode mode = features::LengthMode::truncate);
features::FeatureMatrix load_ecg_csv(const std::string& path, EcgLabelSet set,
                                     features::LengthMode mode = features::LengthMode::truncate);

void write_ecg_csv(const features::FeatureMatrix& m, std::ostream& out);
void save_ecg_csv(const features::FeatureMatrix& m, const std::string& path);

/// Shortest decimal form that reads back to the same double (%.17g).
std::string format_double(double v);

}  // namespace lgan::io

#include "lgan/io/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "lgan/error.hpp"
#include "lgan/eval/logistic.hpp"
#include "lgan/features/preprocess.hpp"
#include "lgan/features/scoring.hpp"
#include "lgan/io/csv.hpp"
#include "lgan/io/synth.hpp"
#include "lgan/resample/resample.hpp"

namespace lgan::io {

using features::FeatureMatrix;

namespace {

constexpr std::uint64_t kStreamSynth = 1;
constexpr std::uint64_t kStreamSplit = 2;
constexpr std::uint64_t kStreamFolds = 3;
constexpr std::uint64_t kStreamResample = 4;
constexpr std::uint64_t kStreamLgan = 5;
constexpr std::uint64_t kStreamConvLstm = 6;
constexpr std::uint64_t kStreamLogistic = 7;
constexpr std::uint64_t kFoldSeedOffset = 1000;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string staged(const char* stage, const std::exception& e) { return std::string(stage) + ": " + e.what(); }

template <class F>
auto run_stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(staged(name, e));
  } catch (const DataError& e) {
    throw DataError(staged(name, e));
  } catch (const DimensionError& e) {
    throw DimensionError(staged(name, e));
  } catch (const ContractError& e) {
    throw ContractError(staged(name, e));
  } catch (const NumericalError& e) {
    throw NumericalError(staged(name, e));
  } catch (const Error& e) {
    throw Error(staged(name, e));
  } catch (const std::filesystem::filesystem_error& e) {
    throw DataError(staged(name, e));
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::string join(const std::vector<std::string>& items, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::string join_numbers(const std::vector<double>& v) {
  std::vector<std::string> parts;
  for (double x : v) parts.push_back(format_double(x));
  return join(parts);
}

int class_index(const FeatureMatrix& m, const std::string& name) {
  const auto it = std::find(m.class_names.begin(), m.class_names.end(), name);
  if (it == m.class_names.end()) throw DataError("class '" + name + "' is missing from the data");
  return static_cast<int>(it - m.class_names.begin());
}

FeatureMatrix load_data(const RunConfig& c) {
  FeatureMatrix m;
  if (c.data.empty()) {
    SynthOptions o;
    o.kind = is_pva(c.task) ? SynthKind::pva : SynthKind::ecg;
    o.n = c.synth_n;
    o.anomaly_fraction = c.anomaly_fraction;
    o.patients = c.patients;
    o.seed = derive_seed(c.seed, kStreamSynth);
    if (c.task == Task::pva_binary_bsa) o.anomaly_classes = {"BSA"};
    if (c.task == Task::pva_binary_dta) o.anomaly_classes = {"DTA"};
    if (c.task == Task::ecg_multiclass) o.ecg_classes = 5;
    m = synth_dataset(o).data;
  } else if (is_pva(c.task)) {
    m = load_breath_csv(c.data);
  } else {
    const auto set = c.task == Task::ecg_multiclass ? EcgLabelSet::mitbih : EcgLabelSet::ptb;
    m = load_ecg_csv(c.data, set, c.ecg_length_mode);
  }
  if (m.row_ids.empty()) {
    m.row_ids.resize(m.size());
    std::iota(m.row_ids.begin(), m.row_ids.end(), std::int64_t{0});
  }
  m.validate();
  return m;
}

std::vector<std::string> with_history(const std::vector<std::string>& base, std::size_t prev) {
  std::vector<std::string> out = base;
  for (std::size_t p = 1; p <= prev; ++p) {
    for (const auto& c : base) out.push_back(c + "_prev" + std::to_string(p));
  }
  return out;
}

std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& taken) {
  std::vector<bool> used(n, false);
  for (auto i : taken) used[i] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!used[i]) out.push_back(i);
  }
  return out;
}

struct Setup {
  gan::GeneratorSpec gspec;
  gan::DiscriminatorSpec dspec;
};

double accuracy_of(std::span<const int> predicted, const FeatureMatrix& truth) {
  return eval::multiclass_accuracy(eval::confusion(predicted, truth.labels, truth.class_names));
}

std::vector<int> lgan_predict(const gan::LganModel& model, const FeatureMatrix& m) {
  std::vector<int> out;
  for (const auto& p : gan::classify(model, m.rows)) out.push_back(p.label);
  return out;
}

gan::LganModel fit_lgan(const FeatureMatrix& train, const Setup& s, const RunConfig& c, std::uint64_t seed) {
  gan::LganConfig lc = c.lgan;
  lc.seed = seed;
  return gan::train_lgan(train, s.gspec, s.dspec, lc);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

std::string history_csv(const gan::TrainingHistory& h) {
  std::ostringstream out;
  out << "phase,epoch,d_loss,g_loss\n";
  for (std::size_t e = 0; e < h.pretrain_d_loss.size(); ++e) {
    out << "pretrain," << e << ',' << format_double(h.pretrain_d_loss[e]) << ",\n";
  }
  for (std::size_t e = 0; e < h.d_loss.size(); ++e) {
    out << "adversarial," << e << ',' << format_double(h.d_loss[e]) << ','
        << (e < h.g_loss.size() ? format_double(h.g_loss[e]) : "") << '\n';
  }
  return out.str();
}

std::string summary_kv(const PipelineReport& r) {
  std::ostringstream out;
  out << "rows=" << r.rows << '\n'
      << "train_rows=" << r.train_rows << '\n'
      << "test_rows=" << r.test_rows << '\n'
      << "resampled_rows=" << r.resampled_rows << '\n'
      << "synthetic_rows=" << r.synthetic_rows << '\n'
      << "smote_fallbacks=" << join(r.smote_fallbacks) << '\n'
      << "leaked_rows=" << r.leaked_rows << '\n'
      << "features=" << join(r.base_columns) << '\n'
      << "test_accuracy=" << format_double(r.test_accuracy) << '\n';
  for (std::size_t f = 0; f < r.fold_accuracies.size(); ++f) {
    out << "fold" << f << ".accuracy=" << format_double(r.fold_accuracies[f]) << '\n';
  }
  return out.str();
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index);
}

FeatureMatrix select_task_rows(const FeatureMatrix& m, Task task) {
  if (task != Task::pva_binary_bsa && task != Task::pva_binary_dta) return m;
  const std::string anomaly = task == Task::pva_binary_bsa ? "BSA" : "DTA";
  const int normal = class_index(m, "Normal");
  const int keep = class_index(m, anomaly);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m.labels[i] == normal || m.labels[i] == keep) rows.push_back(i);
  }
  FeatureMatrix out = m.subset(rows);
  for (auto& l : out.labels) l = l == normal ? 0 : 1;
  out.class_names = {"Normal", anomaly};
  return out;
}

std::vector<std::string> task_feature_columns(const RunConfig& c, const FeatureMatrix& m) {
  const std::string& p = c.feature_preset;
  std::vector<std::string> cols;
  if (p == "all" || (p == "auto" && (c.task == Task::pva_multiclass || !is_pva(c.task)))) {
    cols = m.column_names;
  } else if (p == "bsa" || (p == "auto" && c.task == Task::pva_binary_bsa)) {
    if (!is_pva(c.task)) throw ConfigError("feature preset 'bsa' needs a PVA task");
    cols = features::bsa_feature_preset();
  } else if (p == "dta" || (p == "auto" && c.task == Task::pva_binary_dta)) {
    if (!is_pva(c.task)) throw ConfigError("feature preset 'dta' needs a PVA task");
    cols = features::dta_feature_preset();
  } else {
    cols = split_list(p);
    if (cols.empty()) throw ConfigError("feature preset '" + p + "' names no column");
  }
  for (const auto& col : cols) {
    if (std::find(m.column_names.begin(), m.column_names.end(), col) == m.column_names.end()) {
      throw ConfigError("feature column '" + col + "' is not in the data");
    }
  }
  if (!is_pva(c.task) && cols.size() != 144) throw ConfigError("ECG tasks need all 144 sample columns");
  return cols;
}

gan::RecordLayout task_layout(Task task, std::size_t columns, std::size_t prev) {
  if (is_pva(task)) return {prev + 1, 1, columns, 1, true};
  if (columns != 144) throw ConfigError("ECG records must hold 144 samples");
  return {1, 12, 12, 1, false};
}

ResampleOutcome resample_training(const FeatureMatrix& train, const RunConfig& config, std::uint64_t seed) {
  ResampleOutcome out;
  out.data = train;
  if (config.resample == ResampleMethod::none) return out;

  std::vector<resample::LabeledPoint> points;
  points.reserve(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) points.push_back({train.rows[i], train.labels[i]});
  const auto counts = train.class_counts();
  const auto largest = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());

  std::mt19937_64 rng(seed);
  std::int64_t next_id = -1;
  for (int c = 0; c < static_cast<int>(counts.size()); ++c) {
    if (c == largest || counts[static_cast<std::size_t>(c)] == 0) continue;
    if (resample::synthetic_quota(points, c, config.resample_ratio) == 0) continue;
    bool use_bsmote = config.resample == ResampleMethod::bsmote;
    if (use_bsmote) {
      const auto cats = resample::bsmote_categorize(points, c, config.bsmote_m);
      use_bsmote = std::any_of(cats.begin(), cats.end(),
                               [](const auto& p) { return p.category == resample::MinorityCategory::danger; });
      if (!use_bsmote) out.smote_fallbacks.push_back(train.class_names[static_cast<std::size_t>(c)]);
    }
    const auto grown = use_bsmote
                           ? resample::bsmote_resample(points, c, config.smote_k, config.bsmote_m, config.resample_ratio, rng)
                           : resample::smote_resample(points, c, config.smote_k, config.resample_ratio, rng);
    for (std::size_t i = points.size(); i < grown.size(); ++i) {
      out.data.rows.push_back(grown[i].features);
      out.data.labels.push_back(grown[i].label);
      if (!out.data.group_ids.empty()) out.data.group_ids.push_back(-1);
      out.data.row_ids.push_back(next_id--);
      ++out.synthetic;
    }
  }
  return out;
}

PipelineReport run_pipeline(const RunConfig& config, const Logger& logger) {
  const auto log = [&](const std::string& msg) {
    if (logger) logger(msg);
  };
  run_stage("config", [&] { config.validate(); });
  PipelineReport report;

  FeatureMatrix all = run_stage("load", [&] { return load_data(config); });
  const std::vector<std::string> loaded_columns = all.column_names;
  log("load: " + std::to_string(all.size()) + " rows");

  const std::size_t prev = is_pva(config.task) ? config.prev_breaths : 0;
  all = run_stage("augment", [&] {
    std::size_t dropped = 0;
    auto m = features::augment_previous(all, prev, &dropped);
    if (dropped) log("augment: " + std::to_string(dropped) + " groups too short for the history");
    return m;
  });
  all = run_stage("task", [&] {
    auto m = select_task_rows(all, config.task);
    const auto counts = m.class_counts();
    if (std::count_if(counts.begin(), counts.end(), [](std::size_t n) { return n > 0; }) < 2) {
      throw DataError("the task leaves fewer than two populated classes");
    }
    return m;
  });
  report.rows = all.size();
  report.classes = all.class_names;

  auto [train, test] = run_stage("split", [&] {
    const auto split = eval::holdout_split(all.labels, config.test_fraction, derive_seed(config.seed, kStreamSplit));
    return std::pair{all.subset(split.train), all.subset(split.test)};
  });
  report.train_rows = train.size();
  report.test_rows = test.size();
  log("split: " + std::to_string(train.size()) + " train, " + std::to_string(test.size()) + " test");

  features::Standardizer scaler;
  run_stage("features", [&] {
    FeatureMatrix base_view = all;
    base_view.column_names = loaded_columns;
    auto base = task_feature_columns(config, base_view);
    if (config.select_method) {
      if (!is_pva(config.task)) throw ConfigError("feature ranking is only available for PVA tasks");
      const auto ranked = features::rank_features(train.select_columns(base), *config.select_method);
      base.clear();
      for (std::size_t i = 0; i < std::min(config.select_top, ranked.size()); ++i) base.push_back(ranked[i].name);
    }
    report.base_columns = base;
    const auto cols = with_history(base, prev);
    train = train.select_columns(cols);
    test = test.select_columns(cols);
    scaler = features::Standardizer::fit(train.rows);
    scaler.apply_in_place(train.rows);
    scaler.apply_in_place(test.rows);
  });
  log("features: " + join(report.base_columns));

  const std::size_t final_index = std::max<std::size_t>(config.folds, 1);
  auto resampled = run_stage("resample", [&] {
    return resample_training(train, config, derive_seed(config.seed, kStreamResample, final_index));
  });
  report.resampled_rows = resampled.data.size();
  report.synthetic_rows = resampled.synthetic;
  report.smote_fallbacks = resampled.smote_fallbacks;
  log("resample: " + std::to_string(resampled.synthetic) + " synthetic rows");

  run_stage("leakage", [&] {
    const std::set<std::int64_t> test_ids(test.row_ids.begin(), test.row_ids.end());
    for (auto id : resampled.data.row_ids) report.leaked_rows += test_ids.count(id);
    if (report.leaked_rows) throw ContractError(std::to_string(report.leaked_rows) + " test rows reached training");
  });

  Setup setup;
  run_stage("model", [&] {
    const auto layout = task_layout(config.task, report.base_columns.size(), prev);
    setup.gspec = config.generator;
    setup.dspec = config.discriminator;
    setup.gspec.layout = setup.dspec.layout = layout;
    setup.gspec.classes = setup.dspec.classes = report.classes.size();
    setup.gspec.validate();
    setup.dspec.validate();
  });

  if (config.folds >= 2) {
    run_stage("cross-validation", [&] {
      const auto plan = eval::kfold_split(train.size(), train.labels, config.folds, derive_seed(config.seed, kStreamFolds));
      for (std::size_t f = 0; f < plan.folds.size(); ++f) {
        const FeatureMatrix val = train.subset(plan.folds[f]);
        const auto rest = complement(train.size(), plan.folds[f]);
        const auto fold_train = resample_training(train.subset(rest), config, derive_seed(config.seed, kStreamResample, f));
        const auto model = fit_lgan(fold_train.data, setup, config, derive_seed(config.seed, kStreamLgan, kFoldSeedOffset + f));
        report.fold_accuracies.push_back(accuracy_of(lgan_predict(model, val), val));
        log("cross-validation: fold " + std::to_string(f) + " accuracy " + format_double(report.fold_accuracies.back()));
      }
    });
  }

  gan::LganModel model = run_stage("train", [&] {
    auto m = fit_lgan(resampled.data, setup, config, derive_seed(config.seed, kStreamLgan, 0));
    m.class_names = report.classes;
    m.metadata["task"] = to_string(config.task);
    m.metadata["features"] = join(train.column_names);
    m.metadata["standardizer.mean"] = join_numbers(scaler.mean);
    m.metadata["standardizer.scale"] = join_numbers(scaler.scale);
    return m;
  });
  report.history = model.history;

  run_stage("evaluate", [&] {
    const auto predicted = lgan_predict(model, test);
    report.test_confusion = eval::confusion(predicted, test.labels, test.class_names);
    report.test_accuracy = eval::multiclass_accuracy(report.test_confusion);
  });
  log("evaluate: test accuracy " + format_double(report.test_accuracy));

  run_stage("replicates", [&] {
    AlgorithmRuns lgan_runs{"lgan", {report.test_accuracy}};
    for (std::size_t r = 1; r < config.replicates; ++r) {
      const auto m = fit_lgan(resampled.data, setup, config, derive_seed(config.seed, kStreamLgan, r));
      lgan_runs.accuracies.push_back(accuracy_of(lgan_predict(m, test), test));
    }
    report.runs.push_back(std::move(lgan_runs));
    for (const auto& name : config.baselines) {
      AlgorithmRuns runs{name, {}};
      for (std::size_t r = 0; r < config.replicates; ++r) {
        std::vector<int> predicted;
        if (name == "convlstm") {
          gan::LganConfig lc = config.lgan;
          lc.seed = derive_seed(config.seed, kStreamConvLstm, r);
          const auto params = gan::train_classifier(resampled.data, setup.dspec, lc);
          for (const auto& p : gan::classify(params, setup.dspec, test.rows)) predicted.push_back(p.label);
        } else {
          eval::LogisticConfig lc;
          lc.epochs = config.logistic_epochs;
          lc.learning_rate = config.logistic_learning_rate;
          lc.batch_size = config.lgan.batch_size;
          lc.seed = derive_seed(config.seed, kStreamLogistic, r);
          const auto m = eval::train_logistic(resampled.data, report.classes.size(), lc);
          for (const auto& row : test.rows) predicted.push_back(m.predict(row));
        }
        runs.accuracies.push_back(accuracy_of(predicted, test));
      }
      log("replicates: " + name + " done");
      report.runs.push_back(std::move(runs));
    }
  });

  run_stage("statistics", [&] {
    if (report.runs.size() < 2) return;
    if (config.replicates < 2) {
      log("statistics: skipped, one replicate per algorithm");
      return;
    }
    std::vector<stats::NamedGroup> groups;
    std::vector<std::vector<double>> values;
    for (const auto& r : report.runs) {
      groups.push_back({r.name, r.accuracies});
      values.push_back(r.accuracies);
    }
    const auto table = stats::one_way_anova(values);
    if (!(table.ms_within > 0.0)) {
      log("statistics: skipped, no within-group variance");
      return;
    }
    report.anova = table;
    report.tukey = stats::tukey_hsd(groups, config.alpha);
  });

  run_stage("write", [&] {
    namespace fs = std::filesystem;
    const fs::path dir(config.out_dir);
    fs::create_directories(dir);
    const auto put = [&](const std::string& name, const std::string& text) {
      write_file(dir / name, text);
      report.files.push_back(name);
    };
    put("config.txt", render_run_config(config));
    gan::save_model(model, (dir / "model.lgan").string());
    report.files.push_back("model.lgan");
    put("metrics.txt", eval::render_report_text(report.test_confusion, config.collapse));
    put("metrics.kv", summary_kv(report) + eval::render_report_kv(report.test_confusion, config.collapse, "test."));
    put("history.csv", history_csv(report.history));
    std::ostringstream runs;
    runs << "algorithm,replicate,accuracy\n";
    for (const auto& r : report.runs) {
      for (std::size_t i = 0; i < r.accuracies.size(); ++i) runs << r.name << ',' << i << ',' << format_double(r.accuracies[i]) << '\n';
    }
    put("replicates.csv", runs.str());
    if (report.anova) {
      put("anova.txt", stats::render_anova_text(*report.anova));
      put("anova.kv", stats::render_anova_kv(*report.anova));
      put("tukey.txt", stats::render_tukey_text(report.tukey, config.alpha));
      put("tukey.kv", stats::render_tukey_kv(report.tukey));
    }
  });
  return report;
}

}  // namespace lgan::io

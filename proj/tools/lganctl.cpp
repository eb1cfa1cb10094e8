#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lgan/error.hpp"
#include "lgan/eval/evaluation.hpp"
#include "lgan/features/preprocess.hpp"
#include "lgan/features/scoring.hpp"
#include "lgan/gan/model.hpp"
#include "lgan/io/config.hpp"
#include "lgan/io/csv.hpp"
#include "lgan/io/pipeline.hpp"
#include "lgan/io/synth.hpp"
#include "lgan/stats/stats.hpp"

namespace {

using lgan::features::FeatureMatrix;
namespace io = lgan::io;

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string task;
  std::optional<std::size_t> prev_breaths;
  std::optional<std::size_t> epochs;
  std::string format;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "key = value run configuration file")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "global seed");
  app->add_option("--out", c.out, "output directory or file");
  app->add_option("--task", c.task, "pva-binary-bsa, pva-binary-dta, pva-multiclass, ecg-binary or ecg-multiclass");
  app->add_option("--prev-breaths", c.prev_breaths, "previous breaths appended to each record")
      ->check(CLI::IsMember({0, 1, 2, 3}));
  app->add_option("--epochs", c.epochs, "adversarial epochs")->check(CLI::IsMember({50, 100, 200}));
  app->add_option("--format", c.format, "report format")->check(CLI::IsMember({"text", "kv"}));
}

io::RunConfig make_config(const Common& c) {
  io::RunConfig cfg = c.config.empty() ? io::RunConfig{} : io::load_run_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.out_dir = c.out;
  if (!c.task.empty()) cfg.task = io::parse_task(c.task);
  if (c.prev_breaths) cfg.prev_breaths = *c.prev_breaths;
  if (c.epochs) cfg.lgan.epochs = *c.epochs;
  if (!c.format.empty()) cfg.format = io::parse_output_format(c.format);
  cfg.validate();
  return cfg;
}

FeatureMatrix load_table(const std::string& path, const io::RunConfig& cfg) {
  if (io::is_pva(cfg.task)) return io::load_breath_csv(path);
  const auto set = cfg.task == io::Task::ecg_multiclass ? io::EcgLabelSet::mitbih : io::EcgLabelSet::ptb;
  return io::load_ecg_csv(path, set, cfg.ecg_length_mode);
}

void save_table(const FeatureMatrix& m, const std::string& path, bool pva) {
  if (path.empty()) {
    pva ? io::write_breath_csv(m, std::cout) : io::write_ecg_csv(m, std::cout);
  } else {
    pva ? io::save_breath_csv(m, path) : io::save_ecg_csv(m, path);
  }
}

std::string class_count_line(const FeatureMatrix& m) {
  std::ostringstream out;
  const auto counts = m.class_counts();
  for (std::size_t c = 0; c < counts.size(); ++c) out << (c ? " " : "") << m.class_names[c] << '=' << counts[c];
  return out.str();
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

std::vector<double> parse_numbers(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (end == item.c_str() || *end != '\0') throw lgan::DataError("model metadata holds a bad number '" + item + "'");
    out.push_back(v);
  }
  return out;
}

std::string meta(const lgan::gan::LganModel& m, const std::string& key) {
  const auto it = m.metadata.find(key);
  if (it == m.metadata.end()) throw lgan::DataError("model file lacks metadata '" + key + "'");
  return it->second;
}

void print_report(const io::PipelineReport& r, const io::RunConfig& cfg) {
  if (cfg.format == io::OutputFormat::kv) {
    std::cout << "test_accuracy=" << io::format_double(r.test_accuracy) << '\n'
              << "leaked_rows=" << r.leaked_rows << '\n'
              << lgan::eval::render_report_kv(r.test_confusion, cfg.collapse, "test.");
    for (const auto& run : r.runs) {
      for (std::size_t i = 0; i < run.accuracies.size(); ++i) {
        std::cout << run.name << '.' << i << ".accuracy=" << io::format_double(run.accuracies[i]) << '\n';
      }
    }
    if (r.anova) std::cout << lgan::stats::render_anova_kv(*r.anova, "anova.") << lgan::stats::render_tukey_kv(r.tukey, "tukey.");
  } else {
    std::cout << "rows " << r.rows << ", train " << r.train_rows << ", test " << r.test_rows << ", resampled "
              << r.resampled_rows << " (" << r.synthetic_rows << " synthetic), leaked " << r.leaked_rows << '\n';
    std::cout << "test accuracy " << io::format_double(r.test_accuracy) << '\n'
              << lgan::eval::render_report_text(r.test_confusion, cfg.collapse);
    for (std::size_t f = 0; f < r.fold_accuracies.size(); ++f) {
      std::cout << "fold " << f << " accuracy " << io::format_double(r.fold_accuracies[f]) << '\n';
    }
    if (r.anova) std::cout << lgan::stats::render_anova_text(*r.anova) << lgan::stats::render_tukey_text(r.tukey, cfg.alpha);
  }
  std::cout << "wrote";
  for (const auto& f : r.files) std::cout << ' ' << (std::filesystem::path(cfg.out_dir) / f).string();
  std::cout << '\n';
}

io::Logger stderr_logger() {
  return [](const std::string& msg) { std::cerr << msg << '\n'; };
}

int run(int argc, char** argv) {
  CLI::App app{"LGAN asynchrony and arrhythmia classifier toolkit"};
  app.require_subcommand(1);

  Common synth_c;
  std::string synth_kind = "pva";
  std::optional<std::size_t> synth_n, synth_patients;
  std::optional<double> synth_fraction;
  std::size_t ecg_classes = 2;
  auto* synth = app.add_subcommand("synth", "write a seeded synthetic dataset");
  add_common(synth, synth_c);
  synth->add_option("--kind", synth_kind, "pva or ecg")->check(CLI::IsMember({"pva", "ecg", "pva-like", "ecg-like"}));
  synth->add_option("--n", synth_n, "records");
  synth->add_option("--anomaly-fraction", synth_fraction, "share of anomalous records");
  synth->add_option("--patients", synth_patients, "patient groups (pva)");
  synth->add_option("--ecg-classes", ecg_classes, "2 or 5")->check(CLI::IsMember({2, 5}));

  Common pre_c;
  std::string pre_input;
  bool pre_standardize = false;
  auto* pre = app.add_subcommand("preprocess", "append previous breaths, keep the task's rows");
  add_common(pre, pre_c);
  pre->add_option("--input", pre_input, "record table")->required()->check(CLI::ExistingFile);
  pre->add_flag("--standardize", pre_standardize, "scale columns to zero mean and unit variance");

  Common res_c;
  std::string res_input, res_method;
  auto* res = app.add_subcommand("resample", "oversample minority classes");
  add_common(res, res_c);
  res->add_option("--input", res_input, "record table")->required()->check(CLI::ExistingFile);
  res->add_option("--method", res_method, "none, smote or bsmote")->check(CLI::IsMember({"none", "smote", "bsmote"}));

  Common sel_c;
  std::string sel_input, sel_method = "mi";
  std::size_t sel_top = 0;
  auto* sel = app.add_subcommand("select-features", "rank feature columns against the label");
  add_common(sel, sel_c);
  sel->add_option("--input", sel_input, "breath table")->required()->check(CLI::ExistingFile);
  sel->add_option("--method", sel_method, "mi, chi2, fisher or pearson")->check(CLI::IsMember({"mi", "chi2", "fisher", "pearson"}));
  sel->add_option("--top", sel_top, "print only the best N columns");

  Common train_c;
  auto* train = app.add_subcommand("train", "train one LGAN and evaluate it on the held-out rows");
  add_common(train, train_c);

  Common eval_c;
  std::string eval_model, eval_input;
  auto* ev = app.add_subcommand("eval", "classify a table with a saved model");
  add_common(ev, eval_c);
  ev->add_option("--model", eval_model, "model file")->required()->check(CLI::ExistingFile);
  ev->add_option("--input", eval_input, "record table")->required()->check(CLI::ExistingFile);

  Common stats_c;
  std::string stats_input;
  double stats_alpha = 0.05;
  auto* st = app.add_subcommand("stats", "one-way ANOVA and Tukey HSD over group,value rows");
  add_common(st, stats_c);
  st->add_option("--input", stats_input, "CSV with group,value rows")->required()->check(CLI::ExistingFile);
  st->add_option("--alpha", stats_alpha, "family-wise error rate");

  Common pipe_c;
  auto* pipe = app.add_subcommand("pipeline", "full run: split, features, resampling, LGAN, baselines, statistics");
  add_common(pipe, pipe_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (synth->parsed()) {
    const auto cfg = make_config(synth_c);
    io::SynthOptions o;
    o.kind = io::parse_synth_kind(synth_kind);
    o.n = synth_n.value_or(cfg.synth_n);
    o.anomaly_fraction = synth_fraction.value_or(cfg.anomaly_fraction);
    o.patients = synth_patients.value_or(cfg.patients);
    o.ecg_classes = ecg_classes;
    o.seed = cfg.seed;
    const auto r = io::synth_dataset(o);
    save_table(r.data, synth_c.out, o.kind == io::SynthKind::pva);
    std::cerr << "synth: " << r.data.size() << " rows, " << class_count_line(r.data) << '\n';
    return kExitOk;
  }

  if (pre->parsed()) {
    const auto cfg = make_config(pre_c);
    FeatureMatrix m = load_table(pre_input, cfg);
    if (io::is_pva(cfg.task)) m = lgan::features::augment_previous(m, cfg.prev_breaths);
    m = io::select_task_rows(m, cfg.task);
    if (pre_standardize) m = lgan::features::standardize(m);
    save_table(m, pre_c.out, io::is_pva(cfg.task));
    std::cerr << "preprocess: " << m.size() << " rows, " << m.width() << " columns, " << class_count_line(m) << '\n';
    return kExitOk;
  }

  if (res->parsed()) {
    auto cfg = make_config(res_c);
    if (!res_method.empty()) cfg.resample = io::parse_resample_method(res_method);
    const FeatureMatrix m = io::select_task_rows(load_table(res_input, cfg), cfg.task);
    const auto r = io::resample_training(m, cfg, io::derive_seed(cfg.seed, 4));
    save_table(r.data, res_c.out, io::is_pva(cfg.task));
    std::cerr << "resample: " << r.synthetic << " synthetic rows, " << class_count_line(r.data) << '\n';
    for (const auto& c : r.smote_fallbacks) std::cerr << "resample: class " << c << " had no danger points, used SMOTE\n";
    return kExitOk;
  }

  if (sel->parsed()) {
    const auto cfg = make_config(sel_c);
    if (!io::is_pva(cfg.task)) throw lgan::ConfigError("feature ranking needs a PVA task");
    const FeatureMatrix m = io::select_task_rows(io::load_breath_csv(sel_input), cfg.task);
    auto ranked = lgan::features::rank_features(m, lgan::features::parse_score_method(sel_method));
    if (sel_top && sel_top < ranked.size()) ranked.resize(sel_top);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      const auto& s = ranked[i];
      if (cfg.format == io::OutputFormat::kv) {
        std::cout << "rank" << i << '=' << s.name << '\n' << s.name << ".score=" << io::format_double(s.score) << '\n';
        if (s.p_value) std::cout << s.name << ".p=" << io::format_double(*s.p_value) << '\n';
      } else {
        std::cout << i + 1 << ' ' << s.name << ' ' << lgan::stats::format_sig6(s.score);
        if (s.p_value) std::cout << " p=" << lgan::stats::format_sig6(*s.p_value);
        std::cout << '\n';
      }
    }
    return kExitOk;
  }

  if (train->parsed()) {
    auto cfg = make_config(train_c);
    cfg.folds = 0;
    cfg.replicates = 1;
    cfg.baselines.clear();
    print_report(io::run_pipeline(cfg, stderr_logger()), cfg);
    return kExitOk;
  }

  if (ev->parsed()) {
    auto cfg = make_config(eval_c);
    const auto model = lgan::gan::load_model(eval_model);
    cfg.task = io::parse_task(meta(model, "task"));
    FeatureMatrix m = load_table(eval_input, cfg);
    if (io::is_pva(cfg.task)) m = lgan::features::augment_previous(m, model.discriminator_spec.layout.time - 1);
    m = io::select_task_rows(m, cfg.task);
    m = m.select_columns(split_list(meta(model, "features")));
    lgan::features::Standardizer scaler{parse_numbers(meta(model, "standardizer.mean")),
                                        parse_numbers(meta(model, "standardizer.scale"))};
    if (scaler.mean.size() != m.width() || scaler.scale.size() != m.width()) {
      throw lgan::DataError("model standardizer does not match its feature list");
    }
    scaler.apply_in_place(m.rows);
    std::vector<int> predicted;
    for (const auto& p : lgan::gan::classify(model, m.rows)) predicted.push_back(p.label);
    const auto cm = lgan::eval::confusion(predicted, m.labels, m.class_names);
    if (cfg.format == io::OutputFormat::kv) {
      std::cout << lgan::eval::render_report_kv(cm, cfg.collapse);
    } else {
      std::cout << "accuracy " << io::format_double(lgan::eval::multiclass_accuracy(cm)) << '\n'
                << lgan::eval::render_report_text(cm, cfg.collapse);
    }
    return kExitOk;
  }

  if (st->parsed()) {
    const auto cfg = make_config(stats_c);
    std::ifstream in(stats_input);
    std::map<std::string, std::vector<double>> by_name;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty() || line == "group,value") continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) throw lgan::DataError(stats_input + ":" + std::to_string(line_no) + ": expected group,value");
      char* end = nullptr;
      const std::string cell = line.substr(comma + 1);
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0') {
        throw lgan::DataError(stats_input + ":" + std::to_string(line_no) + ": bad value '" + cell + "'");
      }
      by_name[line.substr(0, comma)].push_back(v);
    }
    std::vector<lgan::stats::NamedGroup> groups;
    std::vector<std::vector<double>> values;
    for (const auto& [name, v] : by_name) {
      groups.push_back({name, v});
      values.push_back(v);
    }
    const auto table = lgan::stats::one_way_anova(values);
    const auto rows = lgan::stats::tukey_hsd(groups, stats_alpha);
    if (cfg.format == io::OutputFormat::kv) {
      std::cout << lgan::stats::render_anova_kv(table, "anova.") << lgan::stats::render_tukey_kv(rows, "tukey.");
    } else {
      std::cout << lgan::stats::render_anova_text(table) << lgan::stats::render_tukey_text(rows, stats_alpha);
    }
    return kExitOk;
  }

  const auto cfg = make_config(pipe_c);
  print_report(io::run_pipeline(cfg, stderr_logger()), cfg);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const lgan::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const lgan::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const lgan::Error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitOther;
  }
}

#include "lgan/io/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "lgan/error.hpp"
#include "lgan/io/csv.hpp"

namespace lgan::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

std::uint64_t to_u64(const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError("'" + v + "' is not an unsigned integer");
  return out;
}

std::size_t to_size(const std::string& v) { return static_cast<std::size_t>(to_u64(v)); }

double to_double(const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError("'" + v + "' is not a finite number");
  }
  return out;
}

std::vector<std::size_t> to_sizes(const std::string& v) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(v)) out.push_back(to_size(item));
  return out;
}

std::string sizes_string(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

struct Field {
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

Field size_field(std::size_t& x) {
  return {[&x](const std::string& v) { x = to_size(v); }, [&x] { return std::to_string(x); }};
}

Field double_field(double& x) {
  return {[&x](const std::string& v) { x = to_double(v); }, [&x] { return format_double(x); }};
}

Field string_field(std::string& x) {
  return {[&x](const std::string& v) { x = v; }, [&x] { return x; }};
}

template <class E, class Parse, class Show>
Field enum_field(E& x, Parse parse, Show show) {
  return {[&x, parse](const std::string& v) { x = parse(v); }, [&x, show] { return std::string(show(x)); }};
}

void add_optimizer(std::map<std::string, Field>& f, const std::string& prefix, core::OptimizerConfig& o) {
  f[prefix + ".optimizer"] = enum_field(o.rule, core::parse_update_rule, [](core::UpdateRule r) { return core::to_string(r); });
  f[prefix + ".learning_rate"] = double_field(o.learning_rate);
  f[prefix + ".momentum"] = double_field(o.momentum);
  f[prefix + ".l2"] = double_field(o.l2);
  f[prefix + ".beta1"] = double_field(o.beta1);
  f[prefix + ".beta2"] = double_field(o.beta2);
  f[prefix + ".epsilon"] = double_field(o.epsilon);
  f[prefix + ".rms_decay"] = double_field(o.rms_decay);
}

std::map<std::string, Field> fields(RunConfig& c) {
  std::map<std::string, Field> f;
  f["task"] = enum_field(c.task, parse_task, [](Task t) { return to_string(t); });
  f["data"] = string_field(c.data);
  f["synth.n"] = size_field(c.synth_n);
  f["synth.anomaly_fraction"] = double_field(c.anomaly_fraction);
  f["synth.patients"] = size_field(c.patients);
  f["ecg.length_mode"] = enum_field(
      c.ecg_length_mode,
      [](const std::string& v) {
        if (v == "truncate") return features::LengthMode::truncate;
        if (v == "subsample") return features::LengthMode::subsample;
        throw ConfigError("unknown length mode '" + v + "' (expected truncate or subsample)");
      },
      [](features::LengthMode m) { return m == features::LengthMode::truncate ? "truncate" : "subsample"; });
  f["features.preset"] = string_field(c.feature_preset);
  f["features.select"] = {[&c](const std::string& v) {
                            if (v == "none") {
                              c.select_method.reset();
                            } else {
                              c.select_method = features::parse_score_method(v);
                            }
                          },
                          [&c] { return c.select_method ? std::string(features::to_string(*c.select_method)) : "none"; }};
  f["features.top"] = size_field(c.select_top);
  f["prev_breaths"] = size_field(c.prev_breaths);
  f["resample.method"] = enum_field(c.resample, parse_resample_method, [](ResampleMethod m) { return to_string(m); });
  f["resample.k"] = size_field(c.smote_k);
  f["resample.m"] = size_field(c.bsmote_m);
  f["resample.ratio"] = double_field(c.resample_ratio);

  auto& d = c.discriminator;
  f["d.repeat_count"] = size_field(d.repeat_count);
  f["d.hidden_channels"] = size_field(d.hidden_channels);
  f["d.kernel_h"] = size_field(d.kernel_h);
  f["d.kernel_w"] = size_field(d.kernel_w);
  f["d.dense_units"] = size_field(d.dense_units);
  auto& g = c.generator;
  f["g.noise_dim"] = size_field(g.noise_dim);
  f["g.seed_channels"] = size_field(g.seed_channels);
  f["g.encoder"] = {[&g](const std::string& v) { g.encoder = to_sizes(v); }, [&g] { return sizes_string(g.encoder); }};
  f["g.decoder"] = {[&g](const std::string& v) { g.decoder = to_sizes(v); }, [&g] { return sizes_string(g.decoder); }};
  f["g.kernel_h"] = size_field(g.kernel_h);
  f["g.kernel_w"] = size_field(g.kernel_w);
  auto& l = c.lgan;
  f["lgan.epochs"] = size_field(l.epochs);
  f["lgan.batch_size"] = size_field(l.batch_size);
  f["lgan.pretrain_epochs"] = size_field(l.d_pretrain_epochs);
  f["lgan.d_steps"] = size_field(l.d_steps);
  f["lgan.g_steps"] = size_field(l.g_steps);
  f["lgan.generator_loss"] = enum_field(l.generator_loss, gan::parse_generator_loss,
                                        [](gan::GeneratorLoss v) { return gan::to_string(v); });
  f["lgan.class_weight"] = double_field(l.class_weight);
  f["lgan.label_smoothing"] = double_field(l.real_label_smoothing);
  f["lgan.init_bound"] = double_field(l.init_bound);
  f["lgan.lambda"] = double_field(l.lambda);
  add_optimizer(f, "d", l.d_optimizer);
  add_optimizer(f, "g", l.g_optimizer);

  f["eval.test_fraction"] = double_field(c.test_fraction);
  f["eval.folds"] = size_field(c.folds);
  f["eval.replicates"] = size_field(c.replicates);
  f["eval.baselines"] = {[&c](const std::string& v) { c.baselines = v == "none" ? std::vector<std::string>{} : split_list(v); },
                         [&c] { return c.baselines.empty() ? std::string("none") : join(c.baselines); }};
  f["eval.logistic_epochs"] = size_field(c.logistic_epochs);
  f["eval.logistic_learning_rate"] = double_field(c.logistic_learning_rate);
  f["eval.collapse"] = enum_field(c.collapse, eval::parse_collapse_mode, [](eval::CollapseMode m) { return eval::to_string(m); });
  f["eval.alpha"] = double_field(c.alpha);
  f["seed"] = {[&c](const std::string& v) { c.seed = to_u64(v); }, [&c] { return std::to_string(c.seed); }};
  f["out"] = string_field(c.out_dir);
  f["format"] = enum_field(c.format, parse_output_format, [](OutputFormat o) { return to_string(o); });
  return f;
}

}  // namespace

std::vector<KeyValue> parse_key_values(std::istream& in, const std::string& source) {
  std::vector<KeyValue> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = source + ":" + std::to_string(line_no);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    KeyValue kv{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no};
    if (kv.key.empty()) throw ConfigError(where + ": empty key");
    if (!seen.insert(kv.key).second) throw ConfigError(where + ": key '" + kv.key + "' repeats");
    out.push_back(std::move(kv));
  }
  return out;
}

const char* to_string(Task t) {
  switch (t) {
    case Task::pva_binary_bsa:
      return "pva-binary-bsa";
    case Task::pva_binary_dta:
      return "pva-binary-dta";
    case Task::pva_multiclass:
      return "pva-multiclass";
    case Task::ecg_binary:
      return "ecg-binary";
    case Task::ecg_multiclass:
      return "ecg-multiclass";
  }
  return "?";
}

Task parse_task(const std::string& s) {
  for (Task t : {Task::pva_binary_bsa, Task::pva_binary_dta, Task::pva_multiclass, Task::ecg_binary, Task::ecg_multiclass}) {
    if (s == to_string(t)) return t;
  }
  throw ConfigError("unknown task '" + s +
                    "' (expected pva-binary-bsa, pva-binary-dta, pva-multiclass, ecg-binary or ecg-multiclass)");
}

bool is_pva(Task t) { return t == Task::pva_binary_bsa || t == Task::pva_binary_dta || t == Task::pva_multiclass; }

const char* to_string(ResampleMethod m) {
  switch (m) {
    case ResampleMethod::none:
      return "none";
    case ResampleMethod::smote:
      return "smote";
    case ResampleMethod::bsmote:
      return "bsmote";
  }
  return "?";
}

ResampleMethod parse_resample_method(const std::string& s) {
  if (s == "none") return ResampleMethod::none;
  if (s == "smote") return ResampleMethod::smote;
  if (s == "bsmote") return ResampleMethod::bsmote;
  throw ConfigError("unknown resampling method '" + s + "' (expected none, smote or bsmote)");
}

const char* to_string(OutputFormat f) { return f == OutputFormat::text ? "text" : "kv"; }

OutputFormat parse_output_format(const std::string& s) {
  if (s == "text") return OutputFormat::text;
  if (s == "kv") return OutputFormat::kv;
  throw ConfigError("unknown output format '" + s + "' (expected text or kv)");
}

void RunConfig::validate() const {
  if (prev_breaths > 3) throw ConfigError("prev_breaths must be 0, 1, 2 or 3");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("eval.test_fraction must lie in (0, 1)");
  if (replicates == 0) throw ConfigError("eval.replicates must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("eval.alpha must lie in (0, 1)");
  if (!(resample_ratio > 0.0)) throw ConfigError("resample.ratio must be positive");
  if (smote_k == 0 || bsmote_m == 0) throw ConfigError("resample.k and resample.m must be positive");
  if (logistic_epochs == 0 || !(logistic_learning_rate > 0.0)) throw ConfigError("logistic settings must be positive");
  for (const auto& b : baselines) {
    if (b != "convlstm" && b != "logistic") throw ConfigError("unknown baseline '" + b + "' (expected convlstm or logistic)");
  }
  if (select_method && select_top == 0) throw ConfigError("features.select needs features.top > 0");
  if (out_dir.empty()) throw ConfigError("out must name a directory");
  lgan.validate();
}

RunConfig apply_key_values(RunConfig base, const std::vector<KeyValue>& pairs, const std::string& source) {
  auto f = fields(base);
  for (const auto& kv : pairs) {
    const std::string where = source + ":" + std::to_string(kv.line);
    const auto it = f.find(kv.key);
    if (it == f.end()) throw ConfigError(where + ": unknown key '" + kv.key + "'");
    try {
      it->second.set(kv.value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + kv.key + ": " + e.what());
    }
  }
  return base;
}

RunConfig load_run_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return apply_key_values(std::move(base), parse_key_values(in, path), path);
}

std::string render_run_config(const RunConfig& c) {
  RunConfig copy = c;
  std::string out;
  for (const auto& [key, field] : fields(copy)) out += key + " = " + field.get() + "\n";
  return out;
}

}  // namespace lgan::io

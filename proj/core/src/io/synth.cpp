#include "lgan/io/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "lgan/error.hpp"
#include "lgan/features/preprocess.hpp"
#include "lgan/io/csv.hpp"

namespace lgan::io {

namespace {

constexpr std::size_t kBeatSamples = 144;

struct PatientBaseline {
  double peak_flow, inspiratory_time, pause, expiratory_time, decay;
};

double gaussian_bump(double x, double center, double width) {
  const double u = (x - center) / width;
  return std::exp(-0.5 * u * u);
}

std::size_t samples_for(double seconds, double dt) { return static_cast<std::size_t>(std::ceil(seconds / dt - 1e-9)); }

void append_half_sine(std::vector<double>& out, double peak, double duration, double dt) {
  const std::size_t k = samples_for(duration, dt);
  for (std::size_t i = 0; i < k; ++i) out.push_back(peak * std::sin(std::numbers::pi * static_cast<double>(i) * dt / duration));
}

std::vector<double> ecg_beat(const std::string& cls, std::mt19937_64& rng, double noise) {
  std::normal_distribution<double> jitter(0.0, 1.0);
  auto amp = [&](double a) { return a * (1.0 + 0.05 * jitter(rng)); };
  auto pos = [&](double p) { return p + 1.5 * jitter(rng); };
  double qrs_width = 2.5, t_amp = amp(0.3), p_amp = amp(0.12), p_pos = pos(120.0), st = 0.0, spike = 0.0;
  std::size_t length = kBeatSamples;
  if (cls == "S") {
    p_pos = pos(92.0);
    p_amp *= 0.5;
    length = 112;
  } else if (cls == "V") {
    qrs_width = 7.0;
    t_amp = -amp(0.35);
    p_amp = 0.0;
  } else if (cls == "F") {
    qrs_width = 4.5;
    t_amp *= 0.4;
  } else if (cls == "Q") {
    spike = amp(0.6);
    qrs_width = 5.5;
  } else if (cls == "abnormal") {
    st = amp(0.15);
    t_amp = -amp(0.2);
  }
  const double r_pos = pos(10.0), s_pos = r_pos + 2.5 * qrs_width, t_pos = pos(52.0);
  const double r_amp = amp(0.75);
  std::vector<double> beat(kBeatSamples, 0.0);
  for (std::size_t i = 0; i < length; ++i) {
    const double x = static_cast<double>(i);
    double v = 0.2 + r_amp * gaussian_bump(x, r_pos, qrs_width) - 0.12 * gaussian_bump(x, s_pos, qrs_width) +
               t_amp * gaussian_bump(x, t_pos, 8.0) + p_amp * gaussian_bump(x, p_pos, 5.0) +
               spike * gaussian_bump(x, 3.0, 0.8);
    if (x > s_pos + qrs_width && x < t_pos) v += st;
    v *= 1.0 + noise * jitter(rng);
    beat[i] = std::clamp(v, 0.0, 1.0);
  }
  return beat;
}

BreathShape breath_for(const std::string& cls, const PatientBaseline& p, std::mt19937_64& rng) {
  std::normal_distribution<double> jitter(0.0, 0.05);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto vary = [&](double v) { return v * (1.0 + jitter(rng)); };
  BreathShape s;
  s.peak_flow = vary(p.peak_flow);
  s.inspiratory_time = vary(p.inspiratory_time);
  s.pause = vary(p.pause);
  s.expiratory_time = vary(p.expiratory_time);
  s.decay = vary(p.decay);
  if (cls == "BSA") {
    s.expiratory_time *= 0.25 + 0.15 * u(rng);
  } else if (cls == "DTA") {
    s.second_inspiration = s.inspiratory_time * (0.6 + 0.4 * u(rng));
    s.pause = 0.0;
  }
  return s;
}

std::vector<double> jitter_samples(std::vector<double> flow, double noise, std::mt19937_64& rng) {
  if (noise <= 0.0) return flow;
  std::normal_distribution<double> n(0.0, noise);
  for (auto& v : flow) {
    if (v != 0.0) v *= std::max(0.0, 1.0 + n(rng));
  }
  return flow;
}

}  // namespace

const char* to_string(SynthKind k) { return k == SynthKind::pva ? "pva" : "ecg"; }

SynthKind parse_synth_kind(const std::string& s) {
  if (s == "pva" || s == "pva-like") return SynthKind::pva;
  if (s == "ecg" || s == "ecg-like") return SynthKind::ecg;
  throw ConfigError("unknown synthetic kind '" + s + "' (expected pva or ecg)");
}

std::vector<double> breath_waveform(const BreathShape& s, double dt) {
  if (!(dt > 0.0) || !(s.peak_flow > 0.0) || !(s.inspiratory_time > 0.0) || !(s.expiratory_time > 0.0) ||
      !(s.decay > 0.0) || s.pause < 0.0 || s.second_inspiration < 0.0) {
    throw ContractError("breath shape parameters must be positive");
  }
  std::vector<double> flow;
  append_half_sine(flow, s.peak_flow, s.inspiratory_time, dt);
  double volume = 2.0 * s.peak_flow * s.inspiratory_time / std::numbers::pi;
  if (s.second_inspiration > 0.0) {
    // A brief reversal between the two triggered inspirations.
    const std::size_t dip = samples_for(0.1, dt);
    for (std::size_t i = 0; i < dip; ++i) flow.push_back(-0.1 * s.peak_flow);
    const double peak2 = 0.8 * s.peak_flow;
    append_half_sine(flow, peak2, s.second_inspiration, dt);
    volume += 2.0 * peak2 * s.second_inspiration / std::numbers::pi - 0.1 * s.peak_flow * static_cast<double>(dip) * dt;
  }
  flow.insert(flow.end(), samples_for(s.pause, dt), 0.0);
  // Gamma-shaped expiration whose full area is `volume`.
  const double peak_out = volume / (s.decay * std::numbers::e);
  const std::size_t k = samples_for(s.expiratory_time, dt);
  for (std::size_t i = 1; i <= k; ++i) {
    const double t = static_cast<double>(i) * dt / s.decay;
    flow.push_back(-peak_out * t * std::exp(1.0 - t));
  }
  return flow;
}

double positive_flow_area(std::span<const double> flow, double dt) {
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < flow.size(); ++i) area += 0.5 * (std::max(flow[i], 0.0) + std::max(flow[i + 1], 0.0));
  return area * dt;
}

std::vector<double> breath_features(std::span<const double> flow, double dt) {
  if (flow.size() < 2) throw ContractError("breath waveform needs at least two samples");
  std::vector<double> negated(flow.size());
  std::size_t in_samples = 0, out_samples = 0;
  for (std::size_t i = 0; i < flow.size(); ++i) {
    negated[i] = -flow[i];
    in_samples += flow[i] > 0.0;
    out_samples += flow[i] < 0.0;
  }
  if (in_samples == 0 || out_samples == 0) throw DataError("breath waveform lacks an inspiratory or expiratory phase");
  const double ip_auc = positive_flow_area(flow, dt);
  const double ep_auc = positive_flow_area(negated, dt);
  const double tvi = ip_auc * 1000.0 / 60.0;  // mL
  const double tve = ep_auc * 1000.0 / 60.0;
  const double i_time = static_cast<double>(in_samples) * dt;
  const double e_time = static_cast<double>(out_samples) * dt;
  const double max_f = *std::max_element(flow.begin(), flow.end());
  const double min_f = *std::min_element(flow.begin(), flow.end());
  const double rr = 60.0 / (static_cast<double>(flow.size()) * dt);
  // TVi, TVe, iTime, eTime, maxF, minF, ipAUC, epAUC, I:E ratio, inst_RR, tve:tvi ratio
  return {tvi, tve, i_time, e_time, max_f, min_f, ip_auc, ep_auc, i_time / e_time, rr, tve / tvi};
}

SynthResult synth_dataset(const SynthOptions& o) {
  if (!(o.anomaly_fraction > 0.0 && o.anomaly_fraction < 1.0)) {
    throw ConfigError("anomaly fraction must lie strictly between 0 and 1");
  }
  const auto anomalies = static_cast<std::size_t>(std::llround(static_cast<double>(o.n) * o.anomaly_fraction));
  if (anomalies == 0 || anomalies >= o.n) {
    throw ConfigError("n = " + std::to_string(o.n) + " is too small for both classes at anomaly fraction " +
                      format_double(o.anomaly_fraction));
  }
  SynthResult r;
  r.anomalies = anomalies;
  auto& m = r.data;
  std::vector<std::string> anomaly_classes = o.anomaly_classes;
  if (o.kind == SynthKind::pva) {
    m.column_names = features::breath_feature_columns();
    m.class_names = breath_class_names();
    if (anomaly_classes.empty()) anomaly_classes = {"BSA", "DTA"};
  } else {
    if (o.ecg_classes != 2 && o.ecg_classes != 5) throw ConfigError("ecg_classes must be 2 or 5");
    m.class_names = ecg_class_names(o.ecg_classes == 5 ? EcgLabelSet::mitbih : EcgLabelSet::ptb);
    for (std::size_t j = 0; j < kBeatSamples; ++j) m.column_names.push_back("s" + std::to_string(j));
    if (anomaly_classes.empty()) {
      anomaly_classes = o.ecg_classes == 5 ? std::vector<std::string>{"S", "V", "F", "Q"} : std::vector<std::string>{"abnormal"};
    }
  }
  std::vector<int> anomaly_labels;
  for (const auto& c : anomaly_classes) {
    const auto it = std::find(m.class_names.begin(), m.class_names.end(), c);
    if (it == m.class_names.end() || it == m.class_names.begin()) {
      throw ConfigError("'" + c + "' is not an anomalous class of the " + to_string(o.kind) + " dataset");
    }
    anomaly_labels.push_back(static_cast<int>(it - m.class_names.begin()));
  }

  std::mt19937_64 rng(o.seed);
  std::vector<int> labels(o.n, 0);
  for (std::size_t i = 0; i < anomalies; ++i) labels[i] = anomaly_labels[i % anomaly_labels.size()];
  std::shuffle(labels.begin(), labels.end(), rng);

  const std::size_t patients = o.kind == SynthKind::pva ? std::max<std::size_t>(1, std::min(o.patients, o.n)) : 1;
  std::vector<PatientBaseline> baselines;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t p = 0; p < patients; ++p) {
    baselines.push_back({30.0 + 20.0 * u(rng), 0.8 + 0.4 * u(rng), 0.1 + 0.2 * u(rng), 1.8 + 0.8 * u(rng),
                         0.25 + 0.15 * u(rng)});
  }
  for (std::size_t i = 0; i < o.n; ++i) {
    const std::string& cls = m.class_names[static_cast<std::size_t>(labels[i])];
    if (o.kind == SynthKind::pva) {
      // Contiguous blocks of breaths per patient, in time order.
      const std::size_t patient = i * patients / o.n;
      const auto shape = breath_for(cls, baselines[patient], rng);
      auto flow = jitter_samples(breath_waveform(shape), o.sample_noise, rng);
      m.rows.push_back(breath_features(flow));
      m.group_ids.push_back(static_cast<std::int64_t>(patient));
      r.signals.push_back(std::move(flow));
    } else {
      auto beat = ecg_beat(cls, rng, o.sample_noise);
      m.rows.push_back(beat);
      r.signals.push_back(std::move(beat));
    }
    m.labels.push_back(labels[i]);
    m.row_ids.push_back(static_cast<std::int64_t>(i));
  }
  return r;
}

}  // namespace lgan::io

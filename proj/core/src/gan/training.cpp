#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "lgan/core/params.hpp"
#include "lgan/error.hpp"
#include "lgan/gan/model.hpp"

namespace lgan::gan {

using core::Graph;
using core::Parameter;
using core::Tensor;
using core::Var;

namespace {

const double kLogFloor = std::log(kProbFloor);

Tensor one_hot(std::span<const int> labels, std::size_t classes) {
  Tensor t({labels.size(), classes});
  for (std::size_t i = 0; i < labels.size(); ++i) t[i * classes + static_cast<std::size_t>(labels[i])] = 1.0;
  return t;
}

Tensor uniform_labels(std::size_t n, std::size_t classes) {
  return Tensor({n, classes}, 1.0 / static_cast<double>(classes));
}

Tensor stack_rows(std::span<const std::vector<double>> rows, std::size_t width) {
  Tensor t({rows.size(), width});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != width) {
      throw DimensionError("record has width " + std::to_string(rows[i].size()) + ", expected " + std::to_string(width));
    }
    std::copy(rows[i].begin(), rows[i].end(), t.data().begin() + static_cast<std::ptrdiff_t>(i * width));
  }
  return t;
}

Tensor normal_noise(std::size_t n, std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  Tensor t({n, dim});
  for (auto& v : t.data()) v = d(rng);
  return t;
}

// Rows [begin, begin+len) of a `[N, C]` node.
Var take_rows(Graph& g, Var x, std::size_t begin, std::size_t len) {
  const auto s = g.value(x).shape();
  const Var flat = g.reshape(x, {1, s[0] * s[1]});
  return g.reshape(g.slice(flat, begin * s[1], len * s[1]), {len, s[1]});
}

struct Trainer {
  const features::FeatureMatrix& data;
  LganModel& model;
  const StepObserver& observer;
  std::mt19937_64 rng;
  core::Optimizer d_opt;
  core::Optimizer g_opt;
  std::vector<Parameter*> d_params;
  std::vector<Parameter*> g_params;
  std::size_t step = 0;
  std::size_t classes;

  Trainer(const features::FeatureMatrix& d, LganModel& m, const StepObserver& o)
      : data(d),
        model(m),
        observer(o),
        rng(m.config.seed),
        d_opt(m.config.d_optimizer),
        g_opt(m.config.g_optimizer),
        classes(m.discriminator_spec.classes) {}

  std::vector<int> draw_labels(std::size_t n) {
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
    std::vector<int> out(n);
    for (auto& l : out) l = data.labels[pick(rng)];
    return out;
  }

  void notify(Phase phase, std::size_t epoch, double loss) {
    ++step;
    if (!observer) return;
    StepEvent e;
    e.phase = phase;
    e.epoch = epoch;
    e.step = step;
    e.loss = loss;
    const auto gp = std::as_const(model.generator).parameters();
    const auto dp = std::as_const(model.discriminator).parameters();
    e.generator_checksum = core::checksum(gp);
    e.discriminator_checksum = core::checksum(dp);
    observer(e);
  }

  static void check_loss(double loss, Phase phase, std::size_t epoch) {
    if (!std::isfinite(loss)) {
      throw NumericalError(std::string("non-finite ") + (phase == Phase::generator ? "generator" : "discriminator") +
                           " loss at epoch " + std::to_string(epoch));
    }
  }

  double discriminator_update(std::span<const std::size_t> batch, Phase phase, std::size_t epoch) {
    const std::size_t n = batch.size();
    const std::size_t width = model.discriminator_spec.layout.record_width();
    const auto fake_labels = draw_labels(n);
    const Tensor z = normal_noise(n, model.generator_spec.noise_dim, rng);

    Graph g;
    const Var fake = generator_forward(g, model.generator, model.generator_spec, g.constant(z),
                                       g.constant(one_hot(fake_labels, classes)), Binding::frozen);
    const Tensor& fake_v = g.value(fake);
    Tensor records({2 * n, width});
    std::vector<int> labels(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& row = data.rows[batch[i]];
      std::copy(row.begin(), row.end(), records.data().begin() + static_cast<std::ptrdiff_t>(i * width));
      labels[i] = data.labels[batch[i]];
      labels[n + i] = fake_labels[i];
    }
    std::copy(fake_v.data().begin(), fake_v.data().end(), records.data().begin() + static_cast<std::ptrdiff_t>(n * width));

    const auto out = discriminator_forward(g, model.discriminator, model.discriminator_spec, g.constant(records),
                                           g.constant(one_hot(labels, classes)), Binding::trainable);
    const Var logits = g.reshape(out.real_logit, {1, 2 * n});
    Var real_term = g.mean(g.log_sigmoid(g.slice(logits, 0, n), kLogFloor));
    if (const double a = model.config.real_label_smoothing; a > 0.0) {
      const Var flipped = g.mean(g.log_sigmoid(g.scale(g.slice(logits, 0, n), -1.0), kLogFloor));
      real_term = g.add(g.scale(real_term, 1.0 - a), g.scale(flipped, a));
    }
    const Var fake_term = g.mean(g.log_sigmoid(g.scale(g.slice(logits, n, n), -1.0), kLogFloor));
    Var loss = g.scale(g.add(real_term, fake_term), -0.5);
    if (model.config.class_weight > 0.0) {
      const std::span<const int> real_labels(labels.data(), n);
      const Var ce = g.softmax_cross_entropy(take_rows(g, out.class_logits, 0, n), one_hot(real_labels, classes));
      loss = g.add(loss, g.scale(ce, model.config.class_weight));
    }
    const double value = g.value(loss)[0];
    check_loss(value, phase, epoch);
    core::zero_grads(d_params);
    g.backward(loss);
    d_opt.step(d_params);
    notify(phase, epoch, value);
    return value;
  }

  double generator_update(std::size_t n, std::size_t epoch) {
    const auto labels = draw_labels(n);
    const Tensor z = normal_noise(n, model.generator_spec.noise_dim, rng);
    Graph g;
    const Var onehot = g.constant(one_hot(labels, classes));
    const Var fake = generator_forward(g, model.generator, model.generator_spec, g.constant(z), onehot, Binding::trainable);
    const auto out = discriminator_forward(g, model.discriminator, model.discriminator_spec, fake, onehot, Binding::frozen);
    const Var logits = g.reshape(out.real_logit, {1, n});
    const Var loss = model.config.generator_loss == GeneratorLoss::saturating
                         ? g.mean(g.log_sigmoid(g.scale(logits, -1.0), kLogFloor))
                         : g.scale(g.mean(g.log_sigmoid(logits, kLogFloor)), -1.0);
    const double value = g.value(loss)[0];
    check_loss(value, Phase::generator, epoch);
    core::zero_grads(g_params);
    g.backward(loss);
    g_opt.step(g_params);
    notify(Phase::generator, epoch, value);
    return value;
  }

  std::vector<std::vector<std::size_t>> batches() {
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<std::size_t>> out;
    const std::size_t m = model.config.batch_size;
    for (std::size_t b = 0; b < order.size(); b += m) {
      out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(b),
                       order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), b + m)));
    }
    return out;
  }

  void run() {
    model.generator = GeneratorParams::init(model.generator_spec, model.config.init_bound, rng);
    model.discriminator = DiscriminatorParams::init(model.discriminator_spec, model.config.init_bound, rng);
    d_params = model.discriminator.parameters();
    g_params = model.generator.parameters();

    for (std::size_t e = 0; e < model.config.d_pretrain_epochs; ++e) {
      double sum = 0.0;
      std::size_t count = 0;
      for (const auto& batch : batches()) {
        sum += discriminator_update(batch, Phase::pretrain, e);
        ++count;
      }
      model.history.pretrain_d_loss.push_back(sum / static_cast<double>(count));
    }
    for (std::size_t e = 0; e < model.config.epochs; ++e) {
      double d_sum = 0.0, g_sum = 0.0;
      std::size_t d_count = 0, g_count = 0;
      for (const auto& batch : batches()) {
        for (std::size_t s = 0; s < model.config.d_steps; ++s) {
          d_sum += discriminator_update(batch, Phase::discriminator, e);
          ++d_count;
        }
        for (std::size_t s = 0; s < model.config.g_steps; ++s) {
          g_sum += generator_update(batch.size(), e);
          ++g_count;
        }
      }
      model.history.d_loss.push_back(d_sum / static_cast<double>(d_count));
      model.history.g_loss.push_back(g_sum / static_cast<double>(g_count));
    }
  }
};

void check_training_data(const features::FeatureMatrix& train, const DiscriminatorSpec& dspec) {
  if (train.empty()) throw DataError("training set is empty");
  train.validate();
  if (train.width() != dspec.layout.record_width()) {
    throw DimensionError("training records have width " + std::to_string(train.width()) + " but the layout expects " +
                         std::to_string(dspec.layout.record_width()));
  }
  for (int l : train.labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= dspec.classes) {
      throw DataError("training label " + std::to_string(l) + " outside the " + std::to_string(dspec.classes) + " classes");
    }
  }
}

}  // namespace

const char* to_string(Phase p) {
  switch (p) {
    case Phase::pretrain:
      return "pretrain";
    case Phase::discriminator:
      return "discriminator";
    case Phase::generator:
      return "generator";
  }
  return "?";
}

void LganConfig::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (d_steps == 0 || g_steps == 0) throw ConfigError("d_steps and g_steps must be positive");
  if (lambda != 0.0) throw ConfigError("lambda (mutual-information regularizer) must be 0");
  if (!(class_weight >= 0.0) || !std::isfinite(class_weight)) throw ConfigError("class weight must be a finite value >= 0");
  if (!(init_bound > 0.0) || !std::isfinite(init_bound)) throw ConfigError("init bound must be positive");
  if (!(real_label_smoothing >= 0.0 && real_label_smoothing < 0.5)) throw ConfigError("real label smoothing must lie in [0, 0.5)");
  d_optimizer.validate();
  g_optimizer.validate();
}

LganModel train_lgan(const features::FeatureMatrix& train, const GeneratorSpec& gspec, const DiscriminatorSpec& dspec,
                     const LganConfig& config, const StepObserver& observer) {
  config.validate();
  gspec.validate();
  dspec.validate();
  if (gspec.layout.record_width() != dspec.layout.record_width() || gspec.classes != dspec.classes) {
    throw ConfigError("generator and discriminator specs disagree on record width or class count");
  }
  check_training_data(train, dspec);
  LganModel model;
  model.generator_spec = gspec;
  model.discriminator_spec = dspec;
  model.config = config;
  model.class_names = train.class_names;
  Trainer t(train, model, observer);
  t.run();
  return model;
}

DiscriminatorParams train_classifier(const features::FeatureMatrix& train, const DiscriminatorSpec& spec,
                                     const LganConfig& config) {
  config.validate();
  spec.validate();
  check_training_data(train, spec);
  std::mt19937_64 rng(config.seed);
  auto params = DiscriminatorParams::init(spec, config.init_bound, rng);
  auto ps = params.parameters();
  core::Optimizer opt(config.d_optimizer);
  const std::size_t width = spec.layout.record_width();
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t e = 0; e < config.epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      const std::size_t n = std::min(config.batch_size, order.size() - b);
      Tensor records({n, width});
      std::vector<int> labels(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto& row = train.rows[order[b + i]];
        std::copy(row.begin(), row.end(), records.data().begin() + static_cast<std::ptrdiff_t>(i * width));
        labels[i] = train.labels[order[b + i]];
      }
      Graph g;
      const auto out = discriminator_forward(g, params, spec, g.constant(records),
                                             g.constant(uniform_labels(n, spec.classes)), Binding::trainable);
      const Var loss = g.softmax_cross_entropy(out.class_logits, one_hot(labels, spec.classes));
      if (!std::isfinite(g.value(loss)[0])) {
        throw NumericalError("non-finite classifier loss at epoch " + std::to_string(e));
      }
      core::zero_grads(ps);
      g.backward(loss);
      opt.step(ps);
    }
  }
  return params;
}

std::vector<Prediction> classify(const DiscriminatorParams& params, const DiscriminatorSpec& spec,
                                 std::span<const std::vector<double>> records) {
  constexpr std::size_t kChunk = 256;
  const std::size_t width = spec.layout.record_width();
  std::vector<Prediction> out;
  out.reserve(records.size());
  for (std::size_t b = 0; b < records.size(); b += kChunk) {
    const std::size_t n = std::min(kChunk, records.size() - b);
    Graph g;
    const auto o = discriminator_forward(g, params, spec, g.constant(stack_rows(records.subspan(b, n), width)),
                                         g.constant(uniform_labels(n, spec.classes)));
    const Tensor& probs = g.value(g.softmax(o.class_logits));
    for (std::size_t i = 0; i < n; ++i) {
      Prediction pr;
      pr.probabilities.assign(probs.data().begin() + static_cast<std::ptrdiff_t>(i * spec.classes),
                              probs.data().begin() + static_cast<std::ptrdiff_t>((i + 1) * spec.classes));
      pr.label = static_cast<int>(std::max_element(pr.probabilities.begin(), pr.probabilities.end()) -
                                  pr.probabilities.begin());
      out.push_back(std::move(pr));
    }
  }
  return out;
}

std::vector<Prediction> classify(const LganModel& model, std::span<const std::vector<double>> records) {
  return classify(model.discriminator, model.discriminator_spec, records);
}

Prediction classify(const LganModel& model, std::span<const double> record) {
  const std::vector<std::vector<double>> one{std::vector<double>(record.begin(), record.end())};
  return classify(model, one).front();
}

double mean_real_probability(const LganModel& model, std::span<const std::vector<double>> records,
                             std::span<const int> labels) {
  if (records.size() != labels.size()) throw DimensionError("records and labels differ in length");
  if (records.empty()) throw ContractError("mean_real_probability on no records");
  Graph g;
  const auto o = discriminator_forward(g, model.discriminator, model.discriminator_spec,
                                       g.constant(stack_rows(records, model.discriminator_spec.layout.record_width())),
                                       g.constant(one_hot(labels, model.discriminator_spec.classes)));
  const Tensor& probs = g.value(g.sigmoid(o.real_logit));
  double s = 0.0;
  for (double v : probs.data()) s += v;
  return s / static_cast<double>(records.size());
}

std::vector<std::vector<double>> sample_generator(const LganModel& model, std::span<const int> labels,
                                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t n = labels.size();
  if (n == 0) return {};
  Graph g;
  const Var out = generator_forward(g, model.generator, model.generator_spec, g.constant(normal_noise(n, model.generator_spec.noise_dim, rng)),
                                    g.constant(one_hot(labels, model.generator_spec.classes)));
  const Tensor& v = g.value(out);
  const std::size_t w = model.generator_spec.layout.record_width();
  std::vector<std::vector<double>> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i].assign(v.data().begin() + static_cast<std::ptrdiff_t>(i * w), v.data().begin() + static_cast<std::ptrdiff_t>((i + 1) * w));
  }
  return rows;
}

}  // namespace lgan::gan

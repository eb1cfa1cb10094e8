#include "lgan/gan/networks.hpp"

#include <algorithm>

#include "lgan/core/params.hpp"
#include "lgan/error.hpp"

namespace lgan::gan {

using core::Graph;
using core::Parameter;
using core::Tensor;
using core::Var;

namespace {

// Negative-side slope of the discriminator feature layer.
constexpr double kFeatureSlope = 0.2;

Var bind(Graph& g, Parameter& p, Binding b) { return b == Binding::trainable ? g.parameter(p) : g.constant(p.value); }

Var dense(Graph& g, Var x, DenseParams& d, Binding b) {
  return g.dense(x, bind(g, d.weights, b), bind(g, d.bias, b));
}

void append(std::vector<Parameter*>& out, DenseParams& d) {
  out.push_back(&d.weights);
  out.push_back(&d.bias);
}

void append(std::vector<const Parameter*>& out, const DenseParams& d) {
  out.push_back(&d.weights);
  out.push_back(&d.bias);
}

std::size_t pool_window(std::size_t dim) { return std::min<std::size_t>(2, dim); }

std::vector<Var> split_frames(Graph& g, Var records, const RecordLayout& layout) {
  const auto& shape = g.value(records).shape();
  if (shape.size() != 2 || shape[1] != layout.record_width()) {
    throw DimensionError("records " + core::shape_string(shape) + " do not match record width " +
                         std::to_string(layout.record_width()));
  }
  const std::size_t n = shape[0];
  const std::size_t fs = layout.frame_size();
  std::vector<Var> frames;
  for (std::size_t t = 0; t < layout.time; ++t) {
    const std::size_t idx = layout.newest_first ? layout.time - 1 - t : t;
    frames.push_back(g.reshape(g.slice(records, idx * fs, fs), {n, layout.height, layout.width, layout.channels}));
  }
  return frames;
}

void check_labels(const Graph& g, Var labels, std::size_t n, std::size_t classes) {
  const auto& s = g.value(labels).shape();
  if (s.size() != 2 || s[0] != n || s[1] != classes) {
    throw DimensionError("label input " + core::shape_string(s) + " must be [" + std::to_string(n) + ", " +
                         std::to_string(classes) + "]");
  }
}

}  // namespace

void RecordLayout::validate() const {
  if (time == 0 || height == 0 || width == 0 || channels == 0) throw ConfigError("record layout dimensions must be positive");
}

void DiscriminatorSpec::validate() const {
  layout.validate();
  if (classes == 0) throw ConfigError("discriminator needs at least one class");
  if (repeat_count == 0) throw ConfigError("discriminator repeat count must be at least 1");
  if (hidden_channels == 0 || kernel_h == 0 || kernel_w == 0 || dense_units == 0) {
    throw ConfigError("discriminator widths must be positive");
  }
}

void GeneratorSpec::validate() const {
  layout.validate();
  if (classes == 0 || noise_dim == 0 || seed_channels == 0 || kernel_h == 0 || kernel_w == 0) {
    throw ConfigError("generator widths must be positive");
  }
  if (encoder.empty() && decoder.empty()) throw ConfigError("generator needs at least one ConvLSTM layer");
  for (auto c : encoder) {
    if (c == 0) throw ConfigError("generator encoder widths must be positive");
  }
  for (auto c : decoder) {
    if (c == 0) throw ConfigError("generator decoder widths must be positive");
  }
}

DenseParams DenseParams::uniform(const std::string& name, std::size_t in, std::size_t out, double bound,
                                 std::mt19937_64& rng) {
  DenseParams d{Parameter(name + ".w", Tensor({in, out})), Parameter(name + ".b", Tensor({out}))};
  core::init_uniform(d.weights.value, bound, rng);
  core::init_uniform(d.bias.value, bound, rng);
  return d;
}

std::vector<std::pair<std::size_t, std::size_t>> discriminator_grids(const DiscriminatorSpec& spec) {
  std::vector<std::pair<std::size_t, std::size_t>> grids{{spec.layout.height, spec.layout.width}};
  for (std::size_t r = 0; r < spec.repeat_count; ++r) {
    const auto [h, w] = grids.back();
    const std::size_t wh = pool_window(h), ww = pool_window(w);
    grids.emplace_back((h + wh - 1) / wh, (w + ww - 1) / ww);
  }
  return grids;
}

namespace {

rnn::ConvLstmShape block_shape(std::size_t h, std::size_t w, std::size_t cin, std::size_t ch, std::size_t kh,
                               std::size_t kw) {
  return {h, w, cin, ch, std::min(kh, h), std::min(kw, w)};
}

void name_block(rnn::ConvLstmParams& p, const std::string& prefix) {
  for (Parameter* q : p.parameters()) q->name = prefix + "." + q->name;
}

std::vector<std::size_t> generator_channels(const GeneratorSpec& spec) {
  std::vector<std::size_t> c = spec.encoder;
  c.insert(c.end(), spec.decoder.begin(), spec.decoder.end());
  return c;
}

}  // namespace

DiscriminatorParams DiscriminatorParams::init(const DiscriminatorSpec& spec, double bound, std::mt19937_64& rng) {
  spec.validate();
  DiscriminatorParams p;
  const auto grids = discriminator_grids(spec);
  for (std::size_t r = 0; r < spec.repeat_count; ++r) {
    const std::size_t cin = r == 0 ? spec.layout.channels : spec.hidden_channels;
    const auto shape = block_shape(grids[r].first, grids[r].second, cin, spec.hidden_channels, spec.kernel_h, spec.kernel_w);
    p.blocks.push_back(rnn::ConvLstmParams::uniform(shape, bound, rng));
    name_block(p.blocks.back(), "d.block" + std::to_string(r));
  }
  const std::size_t flat = grids.back().first * grids.back().second * spec.hidden_channels;
  p.hidden = DenseParams::uniform("d.hidden", flat, spec.dense_units, bound, rng);
  p.real_head = DenseParams::uniform("d.real", spec.dense_units + spec.classes, 1, bound, rng);
  p.class_head = DenseParams::uniform("d.class", spec.dense_units, spec.classes, bound, rng);
  return p;
}

std::vector<Parameter*> DiscriminatorParams::parameters() {
  std::vector<Parameter*> out;
  for (auto& b : blocks) {
    for (Parameter* q : b.parameters()) out.push_back(q);
  }
  append(out, hidden);
  append(out, real_head);
  append(out, class_head);
  return out;
}

std::vector<const Parameter*> DiscriminatorParams::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& b : blocks) {
    for (const Parameter* q : b.parameters()) out.push_back(q);
  }
  append(out, hidden);
  append(out, real_head);
  append(out, class_head);
  return out;
}

GeneratorParams GeneratorParams::init(const GeneratorSpec& spec, double bound, std::mt19937_64& rng) {
  spec.validate();
  const auto& l = spec.layout;
  GeneratorParams p;
  p.project = DenseParams::uniform("g.project", spec.noise_dim + spec.classes,
                                   l.time * l.height * l.width * spec.seed_channels, bound, rng);
  std::size_t cin = spec.seed_channels;
  const auto channels = generator_channels(spec);
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const auto shape = block_shape(l.height, l.width, cin, channels[i], spec.kernel_h, spec.kernel_w);
    p.layers.push_back(rnn::ConvLstmParams::uniform(shape, bound, rng));
    name_block(p.layers.back(), "g.layer" + std::to_string(i));
    cin = channels[i];
  }
  p.output = DenseParams::uniform("g.output", l.time * l.height * l.width * cin, l.record_width(), bound, rng);
  return p;
}

std::vector<Parameter*> GeneratorParams::parameters() {
  std::vector<Parameter*> out;
  append(out, project);
  for (auto& b : layers) {
    for (Parameter* q : b.parameters()) out.push_back(q);
  }
  append(out, output);
  return out;
}

std::vector<const Parameter*> GeneratorParams::parameters() const {
  std::vector<const Parameter*> out;
  append(out, project);
  for (const auto& b : layers) {
    for (const Parameter* q : b.parameters()) out.push_back(q);
  }
  append(out, output);
  return out;
}

DiscriminatorOutputs discriminator_forward(Graph& g, DiscriminatorParams& params, const DiscriminatorSpec& spec,
                                           Var records, Var labels, Binding binding) {
  if (params.blocks.size() != spec.repeat_count) throw DimensionError("discriminator parameters do not match its spec");
  std::vector<Var> seq = split_frames(g, records, spec.layout);
  const std::size_t n = g.value(records).dim(0);
  check_labels(g, labels, n, spec.classes);

  for (auto& block : params.blocks) {
    rnn::ConvLstmCell cell(g, block, binding == Binding::trainable);
    const auto& shape = cell.shape();
    auto state = cell.constant_state(rnn::conv_lstm_zero_state(shape, n));
    std::vector<Var> pooled;
    for (Var x : seq) {
      state = cell.step(x, state);
      pooled.push_back(g.max_pool(state.h, pool_window(shape.height), pool_window(shape.width)));
    }
    seq = std::move(pooled);
  }
  const auto last_shape = g.value(seq.back()).shape();
  const Var flat = g.reshape(seq.back(), {n, last_shape[1] * last_shape[2] * last_shape[3]});
  DiscriminatorOutputs out;
  out.features = g.leaky_relu(dense(g, flat, params.hidden, binding), kFeatureSlope);
  const Var joined[] = {out.features, labels};
  out.real_logit = dense(g, g.concat(joined), params.real_head, binding);
  out.class_logits = dense(g, out.features, params.class_head, binding);
  return out;
}

Var generator_forward(Graph& g, GeneratorParams& params, const GeneratorSpec& spec, Var noise, Var labels,
                      Binding binding) {
  const auto& ns = g.value(noise).shape();
  if (ns.size() != 2 || ns[1] != spec.noise_dim) {
    throw DimensionError("noise input " + core::shape_string(ns) + " must have width " + std::to_string(spec.noise_dim));
  }
  const std::size_t n = ns[0];
  check_labels(g, labels, n, spec.classes);
  const auto& l = spec.layout;
  const Var in[] = {noise, labels};
  const Var proj = g.relu(dense(g, g.concat(in), params.project, binding));
  const std::size_t fs = l.height * l.width * spec.seed_channels;
  std::vector<Var> seq;
  for (std::size_t t = 0; t < l.time; ++t) {
    seq.push_back(g.reshape(g.slice(proj, t * fs, fs), {n, l.height, l.width, spec.seed_channels}));
  }

  rnn::ConvLstmCell::State carried{};
  bool have_carried = false;
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    rnn::ConvLstmCell cell(g, params.layers[i], binding == Binding::trainable);
    const auto& shape = cell.shape();
    // The first decoder layer starts from the encoder's final state when the widths agree.
    const bool handoff = i == spec.encoder.size() && have_carried && i > 0 &&
                         params.layers[i - 1].shape().hidden_channels == shape.hidden_channels;
    auto state = handoff ? carried : cell.constant_state(rnn::conv_lstm_zero_state(shape, n));
    std::vector<Var> out;
    for (Var x : seq) {
      state = cell.step(x, state);
      out.push_back(state.h);
    }
    carried = state;
    have_carried = true;
    seq = std::move(out);
  }
  std::vector<Var> flat;
  for (Var v : seq) {
    const auto& s = g.value(v).shape();
    flat.push_back(g.reshape(v, {n, s[1] * s[2] * s[3]}));
  }
  return dense(g, g.concat(flat), params.output, binding);
}

// A frozen binding copies values into constants and never touches the parameters.
DiscriminatorOutputs discriminator_forward(Graph& g, const DiscriminatorParams& params, const DiscriminatorSpec& spec,
                                           Var records, Var labels) {
  return discriminator_forward(g, const_cast<DiscriminatorParams&>(params), spec, records, labels, Binding::frozen);
}

Var generator_forward(Graph& g, const GeneratorParams& params, const GeneratorSpec& spec, Var noise, Var labels) {
  return generator_forward(g, const_cast<GeneratorParams&>(params), spec, noise, labels, Binding::frozen);
}

}  // namespace lgan::gan

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "lgan/core/params.hpp"
#include "lgan/error.hpp"
#include "lgan/gan/model.hpp"

namespace lgan::gan {

namespace {

static_assert(std::endian::native == std::endian::little, "model files are written little-endian");

constexpr char kMagic[8] = {'L', 'G', 'A', 'N', 'M', 'O', 'D', 'L'};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

void put_layout(std::ostringstream& o, const std::string& prefix, const RecordLayout& l) {
  o << prefix << ".time=" << l.time << '\n'
    << prefix << ".height=" << l.height << '\n'
    << prefix << ".width=" << l.width << '\n'
    << prefix << ".channels=" << l.channels << '\n'
    << prefix << ".newest_first=" << (l.newest_first ? 1 : 0) << '\n';
}

void put_optimizer(std::ostringstream& o, const std::string& prefix, const core::OptimizerConfig& c) {
  o << prefix << ".rule=" << core::to_string(c.rule) << '\n'
    << prefix << ".learning_rate=" << num(c.learning_rate) << '\n'
    << prefix << ".momentum=" << num(c.momentum) << '\n'
    << prefix << ".l2=" << num(c.l2) << '\n'
    << prefix << ".beta1=" << num(c.beta1) << '\n'
    << prefix << ".beta2=" << num(c.beta2) << '\n'
    << prefix << ".epsilon=" << num(c.epsilon) << '\n'
    << prefix << ".rms_decay=" << num(c.rms_decay) << '\n';
}

std::string spec_text(const LganModel& m) {
  std::ostringstream o;
  const auto& g = m.generator_spec;
  put_layout(o, "generator.layout", g.layout);
  o << "generator.classes=" << g.classes << '\n'
    << "generator.noise_dim=" << g.noise_dim << '\n'
    << "generator.seed_channels=" << g.seed_channels << '\n'
    << "generator.encoder=" << join(g.encoder) << '\n'
    << "generator.decoder=" << join(g.decoder) << '\n'
    << "generator.kernel_h=" << g.kernel_h << '\n'
    << "generator.kernel_w=" << g.kernel_w << '\n';
  const auto& d = m.discriminator_spec;
  put_layout(o, "discriminator.layout", d.layout);
  o << "discriminator.classes=" << d.classes << '\n'
    << "discriminator.repeat_count=" << d.repeat_count << '\n'
    << "discriminator.hidden_channels=" << d.hidden_channels << '\n'
    << "discriminator.kernel_h=" << d.kernel_h << '\n'
    << "discriminator.kernel_w=" << d.kernel_w << '\n'
    << "discriminator.dense_units=" << d.dense_units << '\n';
  const auto& c = m.config;
  o << "config.epochs=" << c.epochs << '\n'
    << "config.batch_size=" << c.batch_size << '\n'
    << "config.d_pretrain_epochs=" << c.d_pretrain_epochs << '\n'
    << "config.d_steps=" << c.d_steps << '\n'
    << "config.g_steps=" << c.g_steps << '\n';
  put_optimizer(o, "config.d_optimizer", c.d_optimizer);
  put_optimizer(o, "config.g_optimizer", c.g_optimizer);
  o << "config.generator_loss=" << to_string(c.generator_loss) << '\n'
    << "config.class_weight=" << num(c.class_weight) << '\n'
    << "config.real_label_smoothing=" << num(c.real_label_smoothing) << '\n'
    << "config.init_bound=" << num(c.init_bound) << '\n'
    << "config.lambda=" << num(c.lambda) << '\n'
    << "config.seed=" << c.seed << '\n';
  std::string classes;
  for (std::size_t i = 0; i < m.class_names.size(); ++i) {
    if (m.class_names[i].find_first_of(",\n") != std::string::npos) {
      throw ContractError("class name '" + m.class_names[i] + "' contains a separator");
    }
    classes += (i ? "," : "") + m.class_names[i];
  }
  o << "classes=" << classes << '\n';
  for (const auto& [k, v] : m.metadata) {
    if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw ContractError("metadata entry '" + k + "' contains a separator");
    }
    o << "meta." << k << '=' << v << '\n';
  }
  return o.str();
}

class SpecReader {
 public:
  explicit SpecReader(const std::string& text) {
    for (const auto& line : split(text, '\n')) {
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw DataError("model spec line without '=': " + line);
      values_[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }

  const std::string& str(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw DataError("model spec is missing '" + key + "'");
    return it->second;
  }

  std::size_t size(const std::string& key) const { return static_cast<std::size_t>(u64(key)); }

  std::uint64_t u64(const std::string& key) const {
    const auto& s = str(key);
    try {
      std::size_t pos = 0;
      const auto v = std::stoull(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw DataError("model spec '" + key + "' is not an unsigned integer: " + s);
    }
  }

  double real(const std::string& key) const {
    const auto& s = str(key);
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw DataError("model spec '" + key + "' is not a number: " + s);
    }
  }

  std::vector<std::size_t> sizes(const std::string& key) const {
    std::vector<std::size_t> out;
    for (const auto& part : split(str(key), ',')) {
      try {
        out.push_back(static_cast<std::size_t>(std::stoull(part)));
      } catch (const std::exception&) {
        throw DataError("model spec '" + key + "' has a bad entry: " + part);
      }
    }
    return out;
  }

  RecordLayout layout(const std::string& prefix) const {
    RecordLayout l;
    l.time = size(prefix + ".time");
    l.height = size(prefix + ".height");
    l.width = size(prefix + ".width");
    l.channels = size(prefix + ".channels");
    l.newest_first = u64(prefix + ".newest_first") != 0;
    return l;
  }

  core::OptimizerConfig optimizer(const std::string& prefix) const {
    core::OptimizerConfig c;
    try {
      c.rule = core::parse_update_rule(str(prefix + ".rule"));
    } catch (const ConfigError& e) {
      throw DataError(std::string("model spec: ") + e.what());
    }
    c.learning_rate = real(prefix + ".learning_rate");
    c.momentum = real(prefix + ".momentum");
    c.l2 = real(prefix + ".l2");
    c.beta1 = real(prefix + ".beta1");
    c.beta2 = real(prefix + ".beta2");
    c.epsilon = real(prefix + ".epsilon");
    c.rms_decay = real(prefix + ".rms_decay");
    return c;
  }

  const std::map<std::string, std::string>& all() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

void parse_spec(const std::string& text, LganModel& m) {
  const SpecReader r(text);
  auto& g = m.generator_spec;
  g.layout = r.layout("generator.layout");
  g.classes = r.size("generator.classes");
  g.noise_dim = r.size("generator.noise_dim");
  g.seed_channels = r.size("generator.seed_channels");
  g.encoder = r.sizes("generator.encoder");
  g.decoder = r.sizes("generator.decoder");
  g.kernel_h = r.size("generator.kernel_h");
  g.kernel_w = r.size("generator.kernel_w");
  auto& d = m.discriminator_spec;
  d.layout = r.layout("discriminator.layout");
  d.classes = r.size("discriminator.classes");
  d.repeat_count = r.size("discriminator.repeat_count");
  d.hidden_channels = r.size("discriminator.hidden_channels");
  d.kernel_h = r.size("discriminator.kernel_h");
  d.kernel_w = r.size("discriminator.kernel_w");
  d.dense_units = r.size("discriminator.dense_units");
  auto& c = m.config;
  c.epochs = r.size("config.epochs");
  c.batch_size = r.size("config.batch_size");
  c.d_pretrain_epochs = r.size("config.d_pretrain_epochs");
  c.d_steps = r.size("config.d_steps");
  c.g_steps = r.size("config.g_steps");
  c.d_optimizer = r.optimizer("config.d_optimizer");
  c.g_optimizer = r.optimizer("config.g_optimizer");
  try {
    c.generator_loss = parse_generator_loss(r.str("config.generator_loss"));
  } catch (const ConfigError& e) {
    throw DataError(std::string("model spec: ") + e.what());
  }
  c.class_weight = r.real("config.class_weight");
  c.real_label_smoothing = r.real("config.real_label_smoothing");
  c.init_bound = r.real("config.init_bound");
  c.lambda = r.real("config.lambda");
  c.seed = r.u64("config.seed");
  m.class_names = split(r.str("classes"), ',');
  for (const auto& [k, v] : r.all()) {
    if (k.rfind("meta.", 0) == 0) m.metadata[k.substr(5)] = v;
  }
  try {
    g.validate();
    d.validate();
  } catch (const Error& e) {
    throw DataError(std::string("model spec is invalid: ") + e.what());
  }
}

class Writer {
 public:
  void bytes(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  void u32(std::uint32_t v) { bytes(&v, sizeof v); }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void text(const std::string& s) {
    u64(s.size());
    out_ += s;
  }
  void doubles(std::span<const double> v) {
    u64(v.size());
    bytes(v.data(), v.size() * sizeof(double));
  }
  std::string& str() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  void bytes(void* p, std::size_t n) {
    if (data_.size() - pos_ < n) throw DataError("model file is truncated at byte " + std::to_string(pos_));
    std::memcpy(p, data_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    bytes(&v, sizeof v);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    bytes(&v, sizeof v);
    return v;
  }
  std::uint64_t count(std::size_t element) {
    const auto n = u64();
    if (n > (data_.size() - pos_) / element) throw DataError("model file is truncated at byte " + std::to_string(pos_));
    return n;
  }
  std::string text() {
    const auto n = count(1);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::vector<double> doubles() {
    std::vector<double> v(count(sizeof(double)));
    bytes(v.data(), v.size() * sizeof(double));
    return v;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::vector<const core::Parameter*> all_parameters(const LganModel& m) {
  auto ps = m.generator.parameters();
  const auto ds = m.discriminator.parameters();
  ps.insert(ps.end(), ds.begin(), ds.end());
  return ps;
}

}  // namespace

std::string serialize_model(const LganModel& model) {
  const std::string spec = spec_text(model);
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kModelFormatVersion);
  w.u64(core::fnv1a(spec));
  w.text(spec);
  const auto params = all_parameters(model);
  w.u64(params.size());
  for (const core::Parameter* p : params) {
    w.text(p->name);
    w.u64(p->value.rank());
    for (std::size_t d : p->value.shape()) w.u64(d);
    w.doubles(p->value.data());
  }
  w.doubles(model.history.pretrain_d_loss);
  w.doubles(model.history.d_loss);
  w.doubles(model.history.g_loss);
  w.u64(core::fnv1a(w.str()));
  return w.str();
}

LganModel deserialize_model(const std::string& bytes) {
  constexpr std::size_t kTrailer = sizeof(std::uint64_t);
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw DataError("not a model file (bad magic)");
  }
  if (bytes.size() < sizeof kMagic + sizeof(std::uint32_t) + kTrailer) throw DataError("model file is truncated");
  const std::string_view body(bytes.data(), bytes.size() - kTrailer);
  Reader r(body);
  char magic[sizeof kMagic];
  r.bytes(magic, sizeof magic);
  const auto version = r.u32();
  if (version != kModelFormatVersion) {
    throw DataError("model format version " + std::to_string(version) + " is not supported (expected " +
                    std::to_string(kModelFormatVersion) + ")");
  }
  std::uint64_t stored_sum;
  std::memcpy(&stored_sum, bytes.data() + body.size(), kTrailer);
  if (stored_sum != core::fnv1a(body)) throw DataError("model file checksum mismatch (corrupted or truncated)");

  const auto digest = r.u64();
  const std::string spec = r.text();
  if (digest != core::fnv1a(spec)) throw DataError("model spec digest mismatch");
  LganModel m;
  parse_spec(spec, m);
  std::mt19937_64 unused;
  m.generator = GeneratorParams::init(m.generator_spec, 0.0, unused);
  m.discriminator = DiscriminatorParams::init(m.discriminator_spec, 0.0, unused);

  std::map<std::string, core::Parameter*> by_name;
  for (core::Parameter* p : m.generator.parameters()) by_name[p->name] = p;
  for (core::Parameter* p : m.discriminator.parameters()) by_name[p->name] = p;
  const auto blocks = r.u64();
  if (blocks != by_name.size()) {
    throw DataError("model file has " + std::to_string(blocks) + " weight blocks, spec implies " +
                    std::to_string(by_name.size()));
  }
  for (std::uint64_t b = 0; b < blocks; ++b) {
    const std::string name = r.text();
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw DataError("model file has unknown weight block '" + name + "'");
    core::Parameter& p = *it->second;
    core::Shape shape(r.count(sizeof(std::uint64_t)));
    for (auto& d : shape) d = r.u64();
    if (shape != p.value.shape()) {
      throw DataError("weight block '" + name + "' has shape " + core::shape_string(shape) + ", expected " +
                      core::shape_string(p.value.shape()));
    }
    const auto values = r.doubles();
    if (values.size() != p.value.size()) throw DataError("weight block '" + name + "' has the wrong element count");
    std::copy(values.begin(), values.end(), p.value.data().begin());
    by_name.erase(it);
  }
  m.history.pretrain_d_loss = r.doubles();
  m.history.d_loss = r.doubles();
  m.history.g_loss = r.doubles();
  if (!r.done()) throw DataError("model file has trailing bytes");
  return m;
}

void save_model(const LganModel& model, const std::string& path) {
  const std::string bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing '" + path + "'");
}

LganModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace lgan::gan

#include "lgan/core/graph.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "lgan/error.hpp"

namespace lgan::core {

Parameter::Parameter(std::string name_, Tensor value_)
    : name(std::move(name_)), value(std::move(value_)), grad(value.shape()) {}

void Parameter::zero_grad() {
  if (grad.shape() != value.shape()) {
    grad = Tensor(value.shape());
  } else {
    grad.fill(0.0);
  }
}

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

void require_trailing(const Tensor& x, const Tensor& b, const char* op) {
  const auto& xs = x.shape();
  const auto& bs = b.shape();
  bool ok = bs.size() <= xs.size();
  for (std::size_t i = 0; ok && i < bs.size(); ++i) ok = bs[bs.size() - 1 - i] == xs[xs.size() - 1 - i];
  if (!ok) {
    throw DimensionError(std::string(op) + ": " + shape_string(bs) + " is not a trailing shape of " +
                         shape_string(xs));
  }
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

}  // namespace

Var Graph::push(Tensor value, std::vector<std::size_t> inputs, Backprop backprop) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = std::any_of(inputs.begin(), inputs.end(), [this](std::size_t i) { return nodes_[i].needs_grad; });
  n.inputs = std::move(inputs);
  if (n.needs_grad) n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

const Graph::Node& Graph::node(Var v) const {
  if (v.id >= nodes_.size()) throw ContractError("variable does not belong to this graph");
  return nodes_[v.id];
}

Var Graph::constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Graph::variable(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = true;
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Graph::parameter(Parameter& p) {
  Node n;
  n.value = p.value;
  n.needs_grad = true;
  n.param = &p;
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

const Tensor& Graph::value(Var v) const { return node(v).value; }

Tensor Graph::grad(Var v) const {
  const auto& n = node(v);
  if (n.grad.empty()) return Tensor(n.value.shape());
  return n.grad;
}

void Graph::accumulate(std::size_t id, Tensor g) {
  auto& n = nodes_[id];
  if (n.grad.empty()) {
    n.grad = std::move(g);
    return;
  }
  auto dst = n.grad.data();
  auto src = g.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void Graph::accumulate(std::size_t id, std::span<const double> g) {
  auto& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor(n.value.shape());
  auto dst = n.grad.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
}

Var Graph::conv2d(Var x, Var kernel, const Conv2dOptions& opts) {
  Tensor out = core::conv2d(value(x), value(kernel), opts);
  return push(std::move(out), {x.id, kernel.id}, [opts](Graph& g, std::size_t self) {
    const auto& n = g.nodes_[self];
    const std::size_t xi = n.inputs[0], ki = n.inputs[1];
    if (g.wants(xi)) {
      g.accumulate(xi, conv2d_grad_input(n.grad, g.nodes_[ki].value, g.nodes_[xi].value.shape(), opts));
    }
    if (g.wants(ki)) {
      g.accumulate(ki, conv2d_grad_kernel(g.nodes_[xi].value, n.grad, g.nodes_[ki].value.shape(), opts));
    }
  });
}

Var Graph::max_pool(Var x, std::size_t window_h, std::size_t window_w) {
  auto r = core::max_pool(value(x), window_h, window_w);
  auto argmax = std::make_shared<std::vector<std::size_t>>(std::move(r.argmax));
  return push(std::move(r.output), {x.id}, [argmax](Graph& g, std::size_t self) {
    const auto& n = g.nodes_[self];
    const std::size_t xi = n.inputs[0];
    g.accumulate(xi, max_pool_grad(n.grad, *argmax, g.nodes_[xi].value.shape()));
  });
}

Var Graph::matmul(Var a, Var b) {
  Tensor out = core::matmul(value(a), value(b));
  return push(std::move(out), {a.id, b.id}, [](Graph& g, std::size_t self) {
    const auto& n = g.nodes_[self];
    const std::size_t ai = n.inputs[0], bi = n.inputs[1];
    const Tensor& av = g.nodes_[ai].value;
    const Tensor& bv = g.nodes_[bi].value;
    const std::size_t inner = bv.dim(0), cols = bv.dim(1);
    const std::size_t rows = av.size() / inner;
    const double* go = n.grad.data().data();
    if (g.wants(ai)) {
      Tensor ga(av.shape());
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t k = 0; k < inner; ++k) {
          const double* bk = bv.data().data() + k * cols;
          const double* gi = go + i * cols;
          double acc = 0.0;
          for (std::size_t j = 0; j < cols; ++j) acc += gi[j] * bk[j];
          ga[i * inner + k] = acc;
        }
      }
      g.accumulate(ai, std::move(ga));
    }
    if (g.wants(bi)) {
      Tensor gb(bv.shape());
      double* pb = gb.data().data();
      for (std::size_t i = 0; i < rows; ++i) {
        const double* gi = go + i * cols;
        for (std::size_t k = 0; k < inner; ++k) {
          const double v = av[i * inner + k];
          double* bk = pb + k * cols;
          for (std::size_t j = 0; j < cols; ++j) bk[j] += v * gi[j];
        }
      }
      g.accumulate(bi, std::move(gb));
    }
  });
}

Var Graph::dense(Var x, Var weights, Var bias) { return broadcast_add(matmul(x, weights), bias); }

Var Graph::add(Var a, Var b) {
  require_same_shape(value(a), value(b), "add");
  Tensor out = value(a);
  const auto& bv = value(b);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return push(std::move(out), {a.id, b.id}, [](Graph& g, std::size_t self) {
    const auto& n = g.nodes_[self];
    for (std::size_t in : n.inputs) {
      if (g.wants(in)) g.accumulate(in, n.grad.data());
    }
  });
}

Var Graph::sub(Var a, Var b) {
  require_same_shape(value(a), value(b), "sub");
  Tensor out = value(a);
  const auto& bv = value(b);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return push(std::move(out), {a.id, b.id}, [](Graph& g, std::size_t self) {
    const auto& n = g.nodes_[self];
    if (g.wants(n.inputs[0])) g.accumulate(n.inputs[0], n.grad.data());
    if (g.wants(n.inputs[1])) {
      Tensor neg = n.grad;
      for (auto& v : neg.data()) v = -v;
      g.accumulate(n.inputs[1], std::move(neg));
    }
  });
}

Var Graph::mul(Var a, Var b) {
  require_same_shape(value(a), value(b), "mul");
  Tensor out = value(a);
  const auto& bv = value(b);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return push(std::move(out), {a.id, b.id}, [](Graph& g, std::size_t self) {
    const auto& n = g.nodes_[self];
    const std::size_t ai = n.inputs[0], bi = n.inputs[1];
    if (g.wants(ai)) {
      Tensor ga = n.grad;
      const auto& bv = g.nodes_[bi].value;
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= bv[i];
      g.accumulate(ai, std::move(ga));
    }
    if (g.wants(bi)) {
      Tensor gb = n.grad;
      const auto& av = g.nodes_[ai].value;
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] *= av[i];
      g.accumulate(bi, std::move(gb));
    }
  });
}

Var Graph::broadcast_add(Var x, Var b) {
  require_trailing(value(x), value(b), "broadcast_add");
  Tensor out = value(x);
  const auto& bv = value(b);
  const std::size_t w = bv.size();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i % w];
  return push(std::move(out), {x.id, b.id}, [](Graph& g, std::size_t self) {
    const auto& n = g.nodes_[self];
    const std::size_t xi = n.inputs[0], bi = n.inputs[1];
    if (g.wants(xi)) g.accumulate(xi, n.grad.data());
    if (g.wants(bi)) {
      Tensor gb(g.nodes_[bi].value.shape());
      const std::size_t w = gb.size();
      for (std::size_t i = 0; i < n.grad.size(); ++i) gb[i % w] += n.grad[i];
      g.accumulate(bi, std::move(gb));
    }
  });
}

Var Graph::broadcast_mul(Var x, Var w) {
  require_trailing(value(x), value(w), "broadcast_mul");
  Tensor out = value(x);
  const auto& wv = value(w);
  const std::size_t width = wv.size();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= wv[i % width];
  return push(std::move(out), {x.id, w.id}, [](Graph& g, std::size_t self) {
    const auto& n = g.nodes_[self];
    const std::size_t xi = n.inputs[0], wi = n.inputs[1];
    const auto& xv = g.nodes_[xi].value;
    const auto& wv = g.nodes_[wi].value;
    const std::size_t width = wv.size();
    if (g.wants(xi)) {
      Tensor gx = n.grad;
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= wv[i % width];
      g.accumulate(xi, std::move(gx));
    }
    if (g.wants(wi)) {
      Tensor gw(wv.shape());
      for (std::size_t i = 0; i < n.grad.size(); ++i) gw[i % width] += n.grad[i] * xv[i];
      g.accumulate(wi, std::move(gw));
    }
  });
}

Var Graph::scale(Var x, double factor) {
  Tensor out = value(x);
  for (auto& v : out.data()) v *= factor;
  return push(std::move(out), {x.id}, [factor](Graph& g, std::size_t self) {
    const auto& n = g.nodes_[self];
    Tensor gx = n.grad;
    for (auto& v : gx.data()) v *= factor;
    g.accumulate(n.inputs[0], std::move(gx));
  });
}

Var Graph::add_scalar(Var x, double c) {
  Tensor out = value(x);
  for (auto& v : out.data()) v += c;
  return push(std::move(out), {x.id}, [](Graph& g, std::size_t self) {
    const auto& n = g.nodes_[self];
    g.accumulate(n.inputs[0], n.grad.data());
  });
}

Var Graph::sigmoid(Var x) {
  Tensor out = activation(Activation::sigmoid, value(x));
  return push(std::move(out), {x.id}, [](Graph& g, std::size_t self) {
    const auto& n = g.nodes_[self];
    Tensor gx = n.grad;
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= n.value[i] * (1.0 - n.value[i]);
    g.accumulate(n.inputs[0], std::move(gx));
  });
}

Var Graph::tanh(Var x) {
  Tensor out = activation(Activation::tanh, value(x));
  return push(std::move(out), {x.id}, [](Graph& g, std::size_t self) {
    const auto& n = g.nodes_[self];
    Tensor gx = n.grad;
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] *= 1.0 - n.value[i] * n.value[i];
    g.accumulate(n.inputs[0], std::move(gx));
  });
}

Var Graph::relu(Var x) {
  Tensor out = activation(Activation::relu, value(x));
  return push(std::move(out), {x.id}, [](Graph& g, std::size_t self) {
    const auto& n = g.nodes_[self];
    const auto& xv = g.nodes_[n.inputs[0]].value;
    Tensor gx = n.grad;
    for (std::size_t i = 0; i < gx.size(); ++i) {
      if (!(xv[i] > 0.0)) gx[i] = 0.0;
    }
    g.accumulate(n.inputs[0], std::move(gx));
  });
}

Var Graph::leaky_relu(Var x, double slope) {
  Tensor out = value(x);
  for (auto& v : out.data()) {
    if (!(v > 0.0)) v *= slope;
  }
  return push(std::move(out), {x.id}, [slope](Graph& g, std::size_t self) {
    const auto& n = g.nodes_[self];
    const auto& xv = g.nodes_[n.inputs[0]].value;
    Tensor gx = n.grad;
    for (std::size_t i = 0; i < gx.size(); ++i) {
      if (!(xv[i] > 0.0)) gx[i] *= slope;
    }
    g.accumulate(n.inputs[0], std::move(gx));
  });
}

Var Graph::softmax(Var x) {
  Tensor out = activation(Activation::softmax, value(x));
  return push(std::move(out), {x.id}, [](Graph& g, std::size_t self) {
    const auto& n = g.nodes_[self];
    const std::size_t width = n.value.shape().back();
    Tensor gx(n.value.shape());
    for (std::size_t r = 0; r < n.value.size() / width; ++r) {
      const std::size_t o = r * width;
      double dot = 0.0;
      for (std::size_t j = 0; j < width; ++j) dot += n.grad[o + j] * n.value[o + j];
      for (std::size_t j = 0; j < width; ++j) gx[o + j] = n.value[o + j] * (n.grad[o + j] - dot);
    }
    g.accumulate(n.inputs[0], std::move(gx));
  });
}

Var Graph::log_sigmoid(Var x, double floor) {
  Tensor out = value(x);
  for (auto& v : out.data()) v = std::max(-softplus(-v), floor);
  return push(std::move(out), {x.id}, [floor](Graph& g, std::size_t self) {
    const auto& n = g.nodes_[self];
    const auto& xv = g.nodes_[n.inputs[0]].value;
    Tensor gx = n.grad;
    for (std::size_t i = 0; i < gx.size(); ++i) {
      gx[i] = (-softplus(-xv[i]) > floor) ? gx[i] * core::sigmoid(-xv[i]) : 0.0;
    }
    g.accumulate(n.inputs[0], std::move(gx));
  });
}

Var Graph::softmax_cross_entropy(Var logits, const Tensor& targets) {
  const Tensor& lv = value(logits);
  require_same_shape(lv, targets, "softmax_cross_entropy");
  const std::size_t width = lv.shape().back();
  const std::size_t rows = lv.size() / width;
  auto probs = std::make_shared<Tensor>(activation(Activation::softmax, lv));
  double loss = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const double* l = lv.data().data() + r * width;
    const double m = *std::max_element(l, l + width);
    double s = 0.0;
    for (std::size_t j = 0; j < width; ++j) s += std::exp(l[j] - m);
    const double lse = m + std::log(s);
    for (std::size_t j = 0; j < width; ++j) loss -= targets[r * width + j] * (l[j] - lse);
  }
  loss /= static_cast<double>(rows);
  auto tgt = std::make_shared<Tensor>(targets);
  return push(Tensor::scalar(loss), {logits.id}, [probs, tgt, width, rows](Graph& g, std::size_t self) {
    const auto& n = g.nodes_[self];
    const double up = n.grad[0] / static_cast<double>(rows);
    Tensor gx(probs->shape());
    for (std::size_t r = 0; r < rows; ++r) {
      double tsum = 0.0;
      for (std::size_t j = 0; j < width; ++j) tsum += (*tgt)[r * width + j];
      for (std::size_t j = 0; j < width; ++j) {
        const std::size_t i = r * width + j;
        gx[i] = up * ((*probs)[i] * tsum - (*tgt)[i]);
      }
    }
    g.accumulate(n.inputs[0], std::move(gx));
  });
}

Var Graph::concat(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat of zero tensors");
  const Shape& first = value(parts[0]).shape();
  Shape lead(first.begin(), first.end() - 1);
  std::size_t total = 0;
  std::vector<std::size_t> widths;
  std::vector<std::size_t> ids;
  for (Var p : parts) {
    const Shape& s = value(p).shape();
    if (s.size() != first.size() || !std::equal(lead.begin(), lead.end(), s.begin())) {
      throw DimensionError("concat: leading dimensions disagree " + shape_string(first) + " vs " + shape_string(s));
    }
    widths.push_back(s.back());
    ids.push_back(p.id);
    total += s.back();
  }
  Shape out_shape = lead;
  out_shape.push_back(total);
  Tensor out(out_shape);
  const std::size_t rows = out.size() / total;
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto& pv = value(parts[k]);
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(pv.data().data() + r * widths[k], widths[k], out.data().data() + r * total + offset);
    }
    offset += widths[k];
  }
  return push(std::move(out), std::move(ids), [widths, total, rows](Graph& g, std::size_t self) {
    const auto& n = g.nodes_[self];
    std::size_t offset = 0;
    for (std::size_t k = 0; k < n.inputs.size(); ++k) {
      const std::size_t in = n.inputs[k];
      if (g.wants(in)) {
        Tensor gp(g.nodes_[in].value.shape());
        for (std::size_t r = 0; r < rows; ++r) {
          std::copy_n(n.grad.data().data() + r * total + offset, widths[k], gp.data().data() + r * widths[k]);
        }
        g.accumulate(in, std::move(gp));
      }
      offset += widths[k];
    }
  });
}

Var Graph::slice(Var x, std::size_t begin, std::size_t len) {
  const Tensor& xv = value(x);
  const std::size_t width = xv.shape().back();
  if (len == 0 || begin + len > width) throw DimensionError("slice out of range of last axis");
  Shape out_shape = xv.shape();
  out_shape.back() = len;
  Tensor out(out_shape);
  const std::size_t rows = xv.size() / width;
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(xv.data().data() + r * width + begin, len, out.data().data() + r * len);
  }
  return push(std::move(out), {x.id}, [begin, len, width, rows](Graph& g, std::size_t self) {
    const auto& n = g.nodes_[self];
    const std::size_t xi = n.inputs[0];
    auto& xn = g.nodes_[xi];
    if (xn.grad.empty()) xn.grad = Tensor(xn.value.shape());
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < len; ++j) xn.grad[r * width + begin + j] += n.grad[r * len + j];
    }
  });
}

Var Graph::reshape(Var x, Shape shape) {
  Tensor out = value(x).reshaped(std::move(shape));
  return push(std::move(out), {x.id}, [](Graph& g, std::size_t self) {
    const auto& n = g.nodes_[self];
    g.accumulate(n.inputs[0], n.grad.data());
  });
}

Var Graph::sum(Var x) {
  double s = 0.0;
  for (double v : value(x).data()) s += v;
  return push(Tensor::scalar(s), {x.id}, [](Graph& g, std::size_t self) {
    const auto& n = g.nodes_[self];
    const std::size_t xi = n.inputs[0];
    g.accumulate(xi, Tensor(g.nodes_[xi].value.shape(), n.grad[0]));
  });
}

Var Graph::mean(Var x) {
  const double count = static_cast<double>(value(x).size());
  return scale(sum(x), 1.0 / count);
}

void Graph::backward(Var loss) {
  const auto& ln = node(loss);
  if (ln.value.size() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " + shape_string(ln.value.shape()));
  }
  for (auto& n : nodes_) n.grad = Tensor();
  nodes_[loss.id].grad = Tensor(ln.value.shape(), 1.0);
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    auto& n = nodes_[i];
    if (n.grad.empty() || !n.needs_grad) continue;
    if (n.backprop) n.backprop(*this, i);
  }
  for (auto& n : nodes_) {
    if (n.param == nullptr || n.grad.empty()) continue;
    Parameter& p = *n.param;
    if (p.grad.shape() != p.value.shape()) p.grad = Tensor(p.value.shape());
    for (std::size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += n.grad[i];
  }
}

}  // namespace lgan::core

#include "lgan/core/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lgan/error.hpp"

namespace lgan::core {

namespace {

struct ImageDims {
  std::size_t n, h, w, c;
};

ImageDims image_dims(const Shape& s) {
  if (s.size() == 3) return {1, s[0], s[1], s[2]};
  if (s.size() == 4) return {s[0], s[1], s[2], s[3]};
  throw DimensionError("expected [H,W,C] or [N,H,W,C], got " + shape_string(s));
}

Shape image_shape(const Shape& like, std::size_t n, std::size_t h, std::size_t w, std::size_t c) {
  if (like.size() == 3) return {h, w, c};
  return {n, h, w, c};
}

void check_kernel(const Shape& k, std::size_t cin) {
  if (k.size() != 4) throw DimensionError("kernel must be [m,n,Cin,Cout], got " + shape_string(k));
  if (k[2] != cin) {
    throw DimensionError("kernel expects " + std::to_string(k[2]) + " input channels, input has " +
                         std::to_string(cin));
  }
}

}  // namespace

ConvGeometry conv_geometry(std::size_t in_h, std::size_t in_w, std::size_t k_h, std::size_t k_w,
                           const Conv2dOptions& opts) {
  if (opts.stride_h == 0 || opts.stride_w == 0) throw ContractError("stride must be >= 1");
  ConvGeometry g;
  if (opts.padding == Padding::valid) {
    if (k_h > in_h || k_w > in_w) throw DimensionError("kernel larger than input under valid padding");
    g.out_h = (in_h - k_h) / opts.stride_h + 1;
    g.out_w = (in_w - k_w) / opts.stride_w + 1;
  } else {
    g.out_h = (in_h + opts.stride_h - 1) / opts.stride_h;
    g.out_w = (in_w + opts.stride_w - 1) / opts.stride_w;
    const std::size_t need_h = (g.out_h - 1) * opts.stride_h + k_h;
    const std::size_t need_w = (g.out_w - 1) * opts.stride_w + k_w;
    g.pad_top = need_h > in_h ? (need_h - in_h) / 2 : 0;
    g.pad_left = need_w > in_w ? (need_w - in_w) / 2 : 0;
  }
  return g;
}

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Conv2dOptions& opts) {
  const auto in = image_dims(input.shape());
  check_kernel(kernel.shape(), in.c);
  const std::size_t kh = kernel.dim(0), kw = kernel.dim(1), cout = kernel.dim(3);
  const auto g = conv_geometry(in.h, in.w, kh, kw, opts);

  Tensor out(image_shape(input.shape(), in.n, g.out_h, g.out_w, cout));
  const double* x = input.data().data();
  const double* k = kernel.data().data();
  double* y = out.data().data();

  for (std::size_t n = 0; n < in.n; ++n) {
    for (std::size_t oy = 0; oy < g.out_h; ++oy) {
      for (std::size_t ox = 0; ox < g.out_w; ++ox) {
        double* yo = y + ((n * g.out_h + oy) * g.out_w + ox) * cout;
        for (std::size_t ki = 0; ki < kh; ++ki) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * opts.stride_h + ki) -
                          static_cast<std::ptrdiff_t>(g.pad_top);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(in.h)) continue;
          const std::size_t eki = opts.flip ? kh - 1 - ki : ki;
          for (std::size_t kj = 0; kj < kw; ++kj) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * opts.stride_w + kj) -
                            static_cast<std::ptrdiff_t>(g.pad_left);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(in.w)) continue;
            const std::size_t ekj = opts.flip ? kw - 1 - kj : kj;
            const double* xi = x + ((n * in.h + iy) * in.w + ix) * in.c;
            const double* kk = k + (eki * kw + ekj) * in.c * cout;
            for (std::size_t ci = 0; ci < in.c; ++ci) {
              const double v = xi[ci];
              const double* kc = kk + ci * cout;
              for (std::size_t co = 0; co < cout; ++co) yo[co] += v * kc[co];
            }
          }
        }
      }
    }
  }
  return out;
}

Tensor conv2d_grad_input(const Tensor& grad_out, const Tensor& kernel, const Shape& input_shape,
                         const Conv2dOptions& opts) {
  const auto in = image_dims(input_shape);
  check_kernel(kernel.shape(), in.c);
  const std::size_t kh = kernel.dim(0), kw = kernel.dim(1), cout = kernel.dim(3);
  const auto g = conv_geometry(in.h, in.w, kh, kw, opts);

  Tensor gin(input_shape);
  const double* go = grad_out.data().data();
  const double* k = kernel.data().data();
  double* gx = gin.data().data();

  for (std::size_t n = 0; n < in.n; ++n) {
    for (std::size_t oy = 0; oy < g.out_h; ++oy) {
      for (std::size_t ox = 0; ox < g.out_w; ++ox) {
        const double* gy = go + ((n * g.out_h + oy) * g.out_w + ox) * cout;
        for (std::size_t ki = 0; ki < kh; ++ki) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * opts.stride_h + ki) -
                          static_cast<std::ptrdiff_t>(g.pad_top);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(in.h)) continue;
          const std::size_t eki = opts.flip ? kh - 1 - ki : ki;
          for (std::size_t kj = 0; kj < kw; ++kj) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * opts.stride_w + kj) -
                            static_cast<std::ptrdiff_t>(g.pad_left);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(in.w)) continue;
            const std::size_t ekj = opts.flip ? kw - 1 - kj : kj;
            double* gxi = gx + ((n * in.h + iy) * in.w + ix) * in.c;
            const double* kk = k + (eki * kw + ekj) * in.c * cout;
            for (std::size_t ci = 0; ci < in.c; ++ci) {
              const double* kc = kk + ci * cout;
              double acc = 0.0;
              for (std::size_t co = 0; co < cout; ++co) acc += gy[co] * kc[co];
              gxi[ci] += acc;
            }
          }
        }
      }
    }
  }
  return gin;
}

Tensor conv2d_grad_kernel(const Tensor& input, const Tensor& grad_out, const Shape& kernel_shape,
                          const Conv2dOptions& opts) {
  const auto in = image_dims(input.shape());
  check_kernel(kernel_shape, in.c);
  const std::size_t kh = kernel_shape[0], kw = kernel_shape[1], cout = kernel_shape[3];
  const auto g = conv_geometry(in.h, in.w, kh, kw, opts);

  Tensor gk(kernel_shape);
  const double* x = input.data().data();
  const double* go = grad_out.data().data();
  double* gkd = gk.data().data();

  for (std::size_t n = 0; n < in.n; ++n) {
    for (std::size_t oy = 0; oy < g.out_h; ++oy) {
      for (std::size_t ox = 0; ox < g.out_w; ++ox) {
        const double* gy = go + ((n * g.out_h + oy) * g.out_w + ox) * cout;
        for (std::size_t ki = 0; ki < kh; ++ki) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * opts.stride_h + ki) -
                          static_cast<std::ptrdiff_t>(g.pad_top);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(in.h)) continue;
          const std::size_t eki = opts.flip ? kh - 1 - ki : ki;
          for (std::size_t kj = 0; kj < kw; ++kj) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * opts.stride_w + kj) -
                            static_cast<std::ptrdiff_t>(g.pad_left);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(in.w)) continue;
            const std::size_t ekj = opts.flip ? kw - 1 - kj : kj;
            const double* xi = x + ((n * in.h + iy) * in.w + ix) * in.c;
            double* gkk = gkd + (eki * kw + ekj) * in.c * cout;
            for (std::size_t ci = 0; ci < in.c; ++ci) {
              const double v = xi[ci];
              double* gkc = gkk + ci * cout;
              for (std::size_t co = 0; co < cout; ++co) gkc[co] += v * gy[co];
            }
          }
        }
      }
    }
  }
  return gk;
}

PoolResult max_pool(const Tensor& input, std::size_t window_h, std::size_t window_w) {
  const auto in = image_dims(input.shape());
  if (window_h == 0 || window_w == 0) throw ContractError("pool window must be positive");
  if (window_h > in.h || window_w > in.w) {
    throw DimensionError("pool window larger than input " + shape_string(input.shape()));
  }
  const std::size_t oh = (in.h + window_h - 1) / window_h;
  const std::size_t ow = (in.w + window_w - 1) / window_w;

  PoolResult r{Tensor(image_shape(input.shape(), in.n, oh, ow, in.c)), {}};
  r.argmax.resize(r.output.size());
  const double* x = input.data().data();
  double* y = r.output.data().data();

  for (std::size_t n = 0; n < in.n; ++n) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        for (std::size_t c = 0; c < in.c; ++c) {
          double best = -std::numeric_limits<double>::infinity();
          std::size_t best_idx = 0;
          bool found = false;
          for (std::size_t dy = 0; dy < window_h; ++dy) {
            const std::size_t iy = oy * window_h + dy;
            if (iy >= in.h) break;
            for (std::size_t dx = 0; dx < window_w; ++dx) {
              const std::size_t ix = ox * window_w + dx;
              if (ix >= in.w) break;
              const std::size_t idx = ((n * in.h + iy) * in.w + ix) * in.c + c;
              if (!found || x[idx] > best) {
                best = x[idx];
                best_idx = idx;
                found = true;
              }
            }
          }
          const std::size_t o = ((n * oh + oy) * ow + ox) * in.c + c;
          y[o] = best;
          r.argmax[o] = best_idx;
        }
      }
    }
  }
  return r;
}

Tensor max_pool_grad(const Tensor& grad_out, const std::vector<std::size_t>& argmax, const Shape& input_shape) {
  if (argmax.size() != grad_out.size()) throw DimensionError("argmax map does not match pooled gradient");
  Tensor g(input_shape);
  for (std::size_t i = 0; i < argmax.size(); ++i) g[argmax[i]] += grad_out[i];
  return g;
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor activation(Activation kind, const Tensor& x) {
  Tensor y = x;
  auto d = y.data();
  switch (kind) {
    case Activation::sigmoid:
      for (auto& v : d) v = sigmoid(v);
      break;
    case Activation::tanh:
      for (auto& v : d) v = std::tanh(v);
      break;
    case Activation::relu:
      for (auto& v : d) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::softmax: {
      if (x.rank() == 0) break;
      const std::size_t width = x.shape().back();
      for (std::size_t row = 0; row < x.size() / width; ++row) {
        double* r = d.data() + row * width;
        const double m = *std::max_element(r, r + width);
        double s = 0.0;
        for (std::size_t j = 0; j < width; ++j) {
          r[j] = std::exp(r[j] - m);
          s += r[j];
        }
        for (std::size_t j = 0; j < width; ++j) r[j] /= s;
      }
      break;
    }
  }
  return y;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (b.rank() != 2) throw DimensionError("right matmul operand must be 2-D, got " + shape_string(b.shape()));
  const bool vec = a.rank() == 1;
  if (!vec && a.rank() != 2) throw DimensionError("left matmul operand must be 1-D or 2-D");
  const std::size_t rows = vec ? 1 : a.dim(0);
  const std::size_t inner = vec ? a.dim(0) : a.dim(1);
  if (inner != b.dim(0)) {
    throw DimensionError("inner dimensions disagree: " + shape_string(a.shape()) + " . " + shape_string(b.shape()));
  }
  const std::size_t cols = b.dim(1);
  Tensor out(vec ? Shape{cols} : Shape{rows, cols});
  const double* pa = a.data().data();
  const double* pb = b.data().data();
  double* po = out.data().data();
  for (std::size_t i = 0; i < rows; ++i) {
    double* oi = po + i * cols;
    for (std::size_t k = 0; k < inner; ++k) {
      const double v = pa[i * inner + k];
      const double* bk = pb + k * cols;
      for (std::size_t j = 0; j < cols; ++j) oi[j] += v * bk[j];
    }
  }
  return out;
}

Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  Tensor out = matmul(input, weights);
  const std::size_t cols = weights.dim(1);
  if (bias.size() != cols) throw DimensionError("bias width does not match dense output width");
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bias[i % cols];
  return out;
}

}  // namespace lgan::core

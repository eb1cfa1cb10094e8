#pragma once

#include <cstddef>
#include <vector>

#include "lgan/core/tensor.hpp"

namespace lgan::core {

enum class Padding { valid, same };

struct Conv2dOptions {
  std::size_t stride_h = 1;
  std::size_t stride_w = 1;
  Padding padding = Padding::valid;
  /// true: convolution with the kernel index flipped, out[x,y] = sum I[x-i, y-j] K[i,j].
  /// false: cross-correlation (the usual "conv layer").
  bool flip = false;
};

/// Output geometry of a 2-D convolution along both spatial axes.
struct ConvGeometry {
  std::size_t out_h = 0;
  std::size_t out_w = 0;
  std::size_t pad_top = 0;
  std::size_t pad_left = 0;
};

ConvGeometry conv_geometry(std::size_t in_h, std::size_t in_w, std::size_t k_h, std::size_t k_w,
                           const Conv2dOptions& opts);

/// input `[H,W,Cin]` or `[N,H,W,Cin]`, kernel `[m,n,Cin,Cout]`. The output keeps the input rank.
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Conv2dOptions& opts = {});
Tensor conv2d_grad_input(const Tensor& grad_out, const Tensor& kernel, const Shape& input_shape,
                         const Conv2dOptions& opts);
Tensor conv2d_grad_kernel(const Tensor& input, const Tensor& grad_out, const Shape& kernel_shape,
                          const Conv2dOptions& opts);

struct PoolResult {
  Tensor output;
  /// Flat input index that produced each output element.
  std::vector<std::size_t> argmax;
};

/// Non-overlapping max pooling over the two spatial axes of `[H,W,C]` or `[N,H,W,C]`.
/// Edges that the window does not divide are padded with -inf. Ties go to the lowest flat index.
PoolResult max_pool(const Tensor& input, std::size_t window_h, std::size_t window_w);
Tensor max_pool_grad(const Tensor& grad_out, const std::vector<std::size_t>& argmax, const Shape& input_shape);

enum class Activation { sigmoid, tanh, relu, softmax };

double sigmoid(double x) noexcept;
/// softmax is taken over the last axis.
Tensor activation(Activation kind, const Tensor& x);

/// `[N,K] x [K,M]` (a rank-1 left operand is treated as a single row).
Tensor matmul(const Tensor& a, const Tensor& b);
/// input . weights + bias, with bias broadcast over rows.
Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias);

}  // namespace lgan::core

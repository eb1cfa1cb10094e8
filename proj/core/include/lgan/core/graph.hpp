#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lgan/core/kernels.hpp"
#include "lgan/core/tensor.hpp"

namespace lgan::core {

/// Trainable tensor with its accumulated gradient.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor value);

  void zero_grad();

  std::string name;
  Tensor value;
  Tensor grad;
};

/// Handle to a node of a Graph. Only meaningful for the graph that created it.
struct Var {
  std::size_t id = 0;
};

/// Reverse-mode differentiation tape.
///
/// Every op evaluates eagerly and appends a node, so node order is a
/// topological order. backward() walks the tape once in reverse and
/// accumulates into the `grad` of every bound Parameter.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;
  Graph(Graph&&) = default;
  Graph& operator=(Graph&&) = default;

  /// Leaf that never receives a gradient.
  Var constant(Tensor value);
  /// Leaf that receives a gradient (readable through grad()) but is not a Parameter.
  Var variable(Tensor value);
  /// Trainable leaf bound to `p`; `p` must outlive backward().
  Var parameter(Parameter& p);

  const Tensor& value(Var v) const;
  /// Gradient of the last backward() loss w.r.t. `v`; zeros if nothing flowed.
  Tensor grad(Var v) const;
  std::size_t size() const noexcept { return nodes_.size(); }

  Var conv2d(Var x, Var kernel, const Conv2dOptions& opts = {});
  Var max_pool(Var x, std::size_t window_h, std::size_t window_w);
  Var matmul(Var a, Var b);
  Var dense(Var x, Var weights, Var bias);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  /// `b` matches the trailing dimensions of `x` and is repeated over the leading ones.
  Var broadcast_add(Var x, Var b);
  Var broadcast_mul(Var x, Var w);
  Var scale(Var x, double factor);
  Var add_scalar(Var x, double c);

  Var sigmoid(Var x);
  Var tanh(Var x);
  Var relu(Var x);
  /// x for x > 0, slope * x otherwise.
  Var leaky_relu(Var x, double slope);
  /// Over the last axis.
  Var softmax(Var x);
  /// max(ln sigmoid(x), floor), computed without forming sigmoid(x).
  Var log_sigmoid(Var x, double floor);
  /// Mean over rows of -sum(target * log_softmax(logits)); `targets` has the logits' shape.
  Var softmax_cross_entropy(Var logits, const Tensor& targets);

  /// Concatenate along the last axis; leading dimensions must agree.
  Var concat(std::span<const Var> parts);
  /// Columns [begin, begin+len) of the last axis.
  Var slice(Var x, std::size_t begin, std::size_t len);
  Var reshape(Var x, Shape shape);

  Var sum(Var x);
  Var mean(Var x);

  /// Differentiate the scalar node `loss`. Clears gradients from any previous call.
  void backward(Var loss);

 private:
  using Backprop = std::function<void(Graph&, std::size_t)>;

  struct Node {
    Tensor value;
    Tensor grad;
    std::vector<std::size_t> inputs;
    Backprop backprop;
    Parameter* param = nullptr;
    bool needs_grad = false;
  };

  Var push(Tensor value, std::vector<std::size_t> inputs, Backprop backprop);
  const Node& node(Var v) const;
  bool wants(std::size_t id) const { return nodes_[id].needs_grad; }
  void accumulate(std::size_t id, Tensor g);
  void accumulate(std::size_t id, std::span<const double> g);

  std::vector<Node> nodes_;
};

}  // namespace lgan::core

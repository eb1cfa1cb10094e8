#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "lgan/core/graph.hpp"
#include "lgan/rnn/conv_lstm.hpp"

namespace lgan::gan {

/// How a flat record maps onto a sequence of spatial frames. The record is the
/// row-major flattening of `[time, height, width, channels]`. With
/// `newest_first` the first frame in the record is the latest in time and the
/// recurrent layers read frames back to front.
struct RecordLayout {
  std::size_t time = 1;
  std::size_t height = 1;
  std::size_t width = 1;
  std::size_t channels = 1;
  bool newest_first = false;

  std::size_t frame_size() const { return height * width * channels; }
  std::size_t record_width() const { return time * frame_size(); }
  void validate() const;
};

struct DiscriminatorSpec {
  RecordLayout layout;
  std::size_t classes = 2;
  std::size_t repeat_count = 5;
  std::size_t hidden_channels = 4;
  std::size_t kernel_h = 3;
  std::size_t kernel_w = 3;
  std::size_t dense_units = 16;

  void validate() const;
};

struct GeneratorSpec {
  RecordLayout layout;
  std::size_t classes = 2;
  std::size_t noise_dim = 8;
  std::size_t seed_channels = 2;
  std::vector<std::size_t> encoder{4};
  std::vector<std::size_t> decoder{4};
  std::size_t kernel_h = 3;
  std::size_t kernel_w = 3;

  void validate() const;
};

struct DenseParams {
  core::Parameter weights;  // [in, out]
  core::Parameter bias;     // [out]

  static DenseParams uniform(const std::string& name, std::size_t in, std::size_t out, double bound,
                             std::mt19937_64& rng);
};

struct DiscriminatorParams {
  std::vector<rnn::ConvLstmParams> blocks;
  DenseParams hidden;
  DenseParams real_head;   // over [features, one-hot label]
  DenseParams class_head;  // over features only

  static DiscriminatorParams init(const DiscriminatorSpec& spec, double bound, std::mt19937_64& rng);
  std::vector<core::Parameter*> parameters();
  std::vector<const core::Parameter*> parameters() const;
};

struct GeneratorParams {
  DenseParams project;
  std::vector<rnn::ConvLstmParams> layers;
  DenseParams output;

  static GeneratorParams init(const GeneratorSpec& spec, double bound, std::mt19937_64& rng);
  std::vector<core::Parameter*> parameters();
  std::vector<const core::Parameter*> parameters() const;
};

enum class Binding { trainable, frozen };

struct DiscriminatorOutputs {
  core::Var real_logit;    // [N, 1]
  core::Var class_logits;  // [N, classes]
  core::Var features;      // [N, dense_units]
};

/// Spatial size of each discriminator block's input, block 0 first, plus the
/// size after the last pooling step.
std::vector<std::pair<std::size_t, std::size_t>> discriminator_grids(const DiscriminatorSpec& spec);

/// `records` is `[N, record_width]`, `labels` `[N, classes]`.
DiscriminatorOutputs discriminator_forward(core::Graph& g, DiscriminatorParams& params, const DiscriminatorSpec& spec,
                                           core::Var records, core::Var labels, Binding binding);

/// `noise` is `[N, noise_dim]`, `labels` `[N, classes]`; returns `[N, record_width]`.
core::Var generator_forward(core::Graph& g, GeneratorParams& params, const GeneratorSpec& spec, core::Var noise,
                            core::Var labels, Binding binding);

/// Frozen-only overloads for read-only parameter sets.
DiscriminatorOutputs discriminator_forward(core::Graph& g, const DiscriminatorParams& params,
                                           const DiscriminatorSpec& spec, core::Var records, core::Var labels);
core::Var generator_forward(core::Graph& g, const GeneratorParams& params, const GeneratorSpec& spec, core::Var noise,
                            core::Var labels);

}  // namespace lgan::gan

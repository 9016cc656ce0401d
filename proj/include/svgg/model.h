// include/svgg/model.h

// Copyright 2026  speechvgg-cpp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef SVGG_MODEL_H_
#define SVGG_MODEL_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "svgg/adam.h"
#include "svgg/layers.h"
#include "svgg/tensor.h"

namespace svgg {

inline constexpr int kNumBlocks = 5;

struct ModelConfig {
  std::vector<int> block_convs{2, 2, 3, 3, 3};
  std::vector<int> block_channels{64, 128, 256, 512, 512};
  std::vector<int> fc_dims{4096, 4096};
  int num_classes = 1000;
  int input_height = 128;
  int input_width = 128;
  double width_scale = 1.0;

  // Channel count per block after width scaling (each at least 1).
  std::vector<int> scaled_channels() const;
  // Length of the flattened last pooling tap.
  std::size_t embedding_dim() const;
  void validate() const;  // throws UsageError

  nlohmann::json to_json() const;
  // Missing keys keep their defaults; unknown keys raise UsageError.
  static ModelConfig from_json(const nlohmann::json& j);
  bool operator==(const ModelConfig&) const = default;
};

enum class TrainableMode { kAll, kHeadOnly, kNone };

TrainableMode parse_trainable_mode(const std::string& s);
const char* trainable_mode_name(TrainableMode mode);

// Max-pool outputs closing each of the five blocks.
template <typename T>
struct PoolingTaps {
  std::array<Tensor<T>, kNumBlocks> taps;
};

template <typename T>
struct ForwardOutput {
  Tensor<T> logits;  // pre-softmax; empty when the head was not run
  PoolingTaps<T> taps;
};

// Activations saved by a forward pass for use by backward().
template <typename T>
struct ForwardCache {
  Tensor<T> input;
  std::vector<Tensor<T>> outputs;                 // per layer
  std::vector<std::vector<std::uint32_t>> argmax;  // pooling layers only
};

// Gradient with respect to the output of one layer.
template <typename T>
struct LayerGrad {
  int layer = 0;
  Tensor<T> grad;
};

template <typename T>
class BasicSpeechVGG {
 public:
  // Kaiming-uniform (fan-in) initialisation, one RNG stream per parameter.
  static BasicSpeechVGG build(const ModelConfig& config, std::uint64_t seed);
  // All parameters zero; the checkpoint loader fills them in.
  static BasicSpeechVGG zeros(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  int num_layers() const { return static_cast<int>(layers_.size()); }
  int layer_index(const std::string& name) const;  // -1 if absent
  const std::array<int, kNumBlocks>& tap_layers() const { return tap_layers_; }
  int logits_layer() const { return num_layers() - 1; }

  std::vector<Param<T>>& params() { return params_; }
  const std::vector<Param<T>>& params() const { return params_; }
  int param_index(const std::string& name) const;  // -1 if absent
  std::size_t parameter_count() const;
  bool is_head_param(std::size_t p) const;

  const std::vector<bool>& trainable_mask() const { return trainable_; }
  void set_trainable(TrainableMode mode);
  TrainableMode trainable_mode() const { return mode_; }

  // Runs the whole chain; taps are captured after each block's pool.
  ForwardOutput<T> forward_with_taps(const Tensor<T>& x, ForwardCache<T>* cache = nullptr) const;
  // Runs layers [0, last_layer] and returns the output of last_layer.
  Tensor<T> forward_to(const Tensor<T>& x, int last_layer, ForwardCache<T>* cache = nullptr,
                       PoolingTaps<T>* taps = nullptr) const;
  // Row-major flattening of the last tap: B x embedding_dim.
  Tensor<T> embed(const Tensor<T>& x) const;

  // Backpropagates the seed gradients through the cached pass. Parameter
  // gradients are accumulated into `grads` for trainable parameters only;
  // the input gradient is returned when requested.
  Tensor<T> backward(const ForwardCache<T>& cache, std::span<const LayerGrad<T>> seeds,
                     Gradients<T>* grads, bool want_input_grad) const;

  // Zeroed buffers for every trainable parameter.
  Gradients<T> make_gradients() const;

  // Copy with fc1, fc2 and the output layer re-initialised for
  // `new_num_classes`; convolution parameters are copied verbatim.
  BasicSpeechVGG swap_head(int new_num_classes, std::uint64_t seed) const;

  template <typename U>
  BasicSpeechVGG<U> cast() const {
    BasicSpeechVGG<U> out;
    out.config_ = config_;
    out.layers_ = layers_;
    out.layer_params_ = layer_params_;
    out.tap_layers_ = tap_layers_;
    out.trainable_ = trainable_;
    out.mode_ = mode_;
    for (const auto& p : params_) out.params_.push_back({p.name, p.value.template cast<U>()});
    return out;
  }

 private:
  template <typename>
  friend class BasicSpeechVGG;

  BasicSpeechVGG() = default;
  void assemble(const ModelConfig& config);
  void init_param(std::size_t p, std::uint64_t seed, std::uint64_t stream);
  void check_input(const Tensor<T>& x) const;

  ModelConfig config_;
  std::vector<LayerSpec> layers_;
  std::vector<std::pair<int, int>> layer_params_;  // (weight, bias) param indices or -1
  std::array<int, kNumBlocks> tap_layers_{};
  std::vector<Param<T>> params_;
  std::vector<bool> trainable_;
  TrainableMode mode_ = TrainableMode::kAll;
};

using SpeechVGG = BasicSpeechVGG<float>;

// Parameter names and shapes implied by a configuration, without allocating.
std::vector<std::pair<std::string, Shape>> parameter_shapes(const ModelConfig& config);

// Canvas batch (B x 128 x 128 values) as a B x 1 x H x W tensor.
template <typename T, typename Range>
Tensor<T> stack_canvases(const Range& canvases) {
  std::size_t n = 0, h = 0, w = 0;
  for (const auto& c : canvases) {
    h = c.rows();
    w = c.cols();
    ++n;
  }
  Tensor<T> x({n, 1, h, w});
  std::size_t b = 0;
  for (const auto& c : canvases) {
    for (std::size_t i = 0; i < h * w; ++i) x[b * h * w + i] = static_cast<T>(c.data()[i]);
    ++b;
  }
  return x;
}

}  // namespace svgg

#endif  // SVGG_MODEL_H_

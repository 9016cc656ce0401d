// src/model.cc

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

#include "svgg/model.h"

#include <cmath>

#include "svgg/error.h"
#include "svgg/random.h"

namespace svgg {

std::vector<int> ModelConfig::scaled_channels() const {
  std::vector<int> out;
  for (int c : block_channels)
    out.push_back(std::max(1, static_cast<int>(std::lround(c * width_scale))));
  return out;
}

std::size_t ModelConfig::embedding_dim() const {
  const auto ch = scaled_channels();
  return static_cast<std::size_t>(input_height >> kNumBlocks) *
         static_cast<std::size_t>(input_width >> kNumBlocks) * ch.back();
}

void ModelConfig::validate() const {
  if (block_convs.size() != kNumBlocks || block_channels.size() != kNumBlocks)
    throw UsageError("model: exactly five blocks are required");
  for (int n : block_convs)
    if (n < 1) throw UsageError("model: every block needs at least one convolution");
  for (int c : block_channels)
    if (c < 1) throw UsageError("model: block channel counts must be >= 1");
  if (!(width_scale > 0.0)) throw UsageError("model: width_scale must be > 0");
  if (fc_dims.size() != 2) throw UsageError("model: fc_dims must have two entries");
  for (int d : fc_dims)
    if (d < 1) throw UsageError("model: fc widths must be >= 1");
  if (num_classes < 2) throw UsageError("model: num_classes must be >= 2");
  if (input_height != 128 || input_width != 128)
    throw UsageError("model: input shape must be 128 x 128");
}

nlohmann::json ModelConfig::to_json() const {
  return {{"block_convs", block_convs},   {"block_channels", block_channels},
          {"fc_dims", fc_dims},           {"num_classes", num_classes},
          {"input_shape", {input_height, input_width}}, {"width_scale", width_scale}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  if (!j.is_object()) throw UsageError("model: expected an object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "block_convs") c.block_convs = value.get<std::vector<int>>();
      else if (key == "block_channels") c.block_channels = value.get<std::vector<int>>();
      else if (key == "fc_dims") c.fc_dims = value.get<std::vector<int>>();
      else if (key == "num_classes") c.num_classes = value.get<int>();
      else if (key == "width_scale") c.width_scale = value.get<double>();
      else if (key == "input_shape") {
        auto s = value.get<std::vector<int>>();
        if (s.size() != 2) throw UsageError("model.input_shape must have two entries");
        c.input_height = s[0];
        c.input_width = s[1];
      } else {
        throw UsageError("unknown config key 'model." + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("model config: ") + e.what());
  }
  c.validate();
  return c;
}

TrainableMode parse_trainable_mode(const std::string& s) {
  if (s == "all") return TrainableMode::kAll;
  if (s == "head_only") return TrainableMode::kHeadOnly;
  if (s == "none") return TrainableMode::kNone;
  throw UsageError("unknown trainable mode '" + s + "'");
}

const char* trainable_mode_name(TrainableMode mode) {
  switch (mode) {
    case TrainableMode::kAll: return "all";
    case TrainableMode::kHeadOnly: return "head_only";
    case TrainableMode::kNone: return "none";
  }
  return "all";
}

namespace {

// Builds the layer chain and parameter list shared by the model and
// parameter_shapes().
struct Chain {
  std::vector<LayerSpec> layers;
  std::vector<std::pair<int, int>> layer_params;
  std::vector<std::pair<std::string, Shape>> params;
  std::array<int, kNumBlocks> taps{};
};

Chain make_chain(const ModelConfig& config) {
  config.validate();
  Chain ch;
  auto add = [&](LayerKind kind, std::string name, std::size_t in, std::size_t out) {
    ch.layers.push_back({kind, name, in, out});
    std::pair<int, int> idx{-1, -1};
    if (kind == LayerKind::kConv3x3 || kind == LayerKind::kDense) {
      idx.first = static_cast<int>(ch.params.size());
      ch.params.emplace_back(name + ".weight", kind == LayerKind::kConv3x3
                                                   ? Shape{out, in, 3, 3}
                                                   : Shape{out, in});
      idx.second = static_cast<int>(ch.params.size());
      ch.params.emplace_back(name + ".bias", Shape{out});
    }
    ch.layer_params.push_back(idx);
  };
  const auto channels = config.scaled_channels();
  std::size_t in = 1;
  for (int b = 0; b < kNumBlocks; ++b) {
    const std::string block = "block" + std::to_string(b + 1);
    for (int i = 0; i < config.block_convs[b]; ++i) {
      const std::string suffix = std::to_string(i + 1);
      add(LayerKind::kConv3x3, block + "_conv" + suffix, in, channels[b]);
      add(LayerKind::kReLU, block + "_relu" + suffix, channels[b], channels[b]);
      in = channels[b];
    }
    add(LayerKind::kMaxPool2x2, block + "_pool", in, in);
    ch.taps[b] = static_cast<int>(ch.layers.size()) - 1;
  }
  const std::size_t flat = config.embedding_dim();
  add(LayerKind::kFlatten, "flatten", flat, flat);
  add(LayerKind::kDense, "fc1", flat, config.fc_dims[0]);
  add(LayerKind::kReLU, "fc1_relu", config.fc_dims[0], config.fc_dims[0]);
  add(LayerKind::kDense, "fc2", config.fc_dims[0], config.fc_dims[1]);
  add(LayerKind::kReLU, "fc2_relu", config.fc_dims[1], config.fc_dims[1]);
  add(LayerKind::kDense, "logits", config.fc_dims[1], config.num_classes);
  return ch;
}

}  // namespace

std::vector<std::pair<std::string, Shape>> parameter_shapes(const ModelConfig& config) {
  return make_chain(config).params;
}

template <typename T>
void BasicSpeechVGG<T>::assemble(const ModelConfig& config) {
  Chain ch = make_chain(config);
  config_ = config;
  layers_ = std::move(ch.layers);
  layer_params_ = std::move(ch.layer_params);
  tap_layers_ = ch.taps;
  params_.clear();
  for (auto& [name, shape] : ch.params) params_.push_back({name, Tensor<T>(shape)});
  trainable_.assign(params_.size(), true);
  mode_ = TrainableMode::kAll;
}

template <typename T>
void BasicSpeechVGG<T>::init_param(std::size_t p, std::uint64_t seed, std::uint64_t stream) {
  Tensor<T>& w = params_[p].value;
  const Shape& s = w.shape();
  // Bias shares the fan-in of its weight, which precedes it.
  const Shape& ws = s.size() == 1 ? params_[p - 1].value.shape() : s;
  std::size_t fan_in = 1;
  for (std::size_t i = 1; i < ws.size(); ++i) fan_in *= ws[i];
  const double bound = s.size() == 1 ? 1.0 / std::sqrt(double(fan_in))
                                     : std::sqrt(6.0 / double(fan_in));
  Rng rng = make_rng(seed, {stream, p});
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : w.values()) v = static_cast<T>(dist(rng));
}

template <typename T>
BasicSpeechVGG<T> BasicSpeechVGG<T>::zeros(const ModelConfig& config) {
  BasicSpeechVGG m;
  m.assemble(config);
  return m;
}

template <typename T>
BasicSpeechVGG<T> BasicSpeechVGG<T>::build(const ModelConfig& config, std::uint64_t seed) {
  BasicSpeechVGG m = zeros(config);
  for (std::size_t p = 0; p < m.params_.size(); ++p) m.init_param(p, seed, tag(SeedStream::kInit));
  return m;
}

template <typename T>
int BasicSpeechVGG<T>::layer_index(const std::string& name) const {
  for (int i = 0; i < num_layers(); ++i)
    if (layers_[i].name == name) return i;
  return -1;
}

template <typename T>
int BasicSpeechVGG<T>::param_index(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i)
    if (params_[i].name == name) return static_cast<int>(i);
  return -1;
}

template <typename T>
std::size_t BasicSpeechVGG<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

template <typename T>
bool BasicSpeechVGG<T>::is_head_param(std::size_t p) const {
  const int flatten = tap_layers_.back() + 1;
  for (int i = flatten; i < num_layers(); ++i) {
    if (layer_params_[i].first == static_cast<int>(p) ||
        layer_params_[i].second == static_cast<int>(p))
      return true;
  }
  return false;
}

template <typename T>
void BasicSpeechVGG<T>::set_trainable(TrainableMode mode) {
  mode_ = mode;
  for (std::size_t p = 0; p < params_.size(); ++p) {
    switch (mode) {
      case TrainableMode::kAll: trainable_[p] = true; break;
      case TrainableMode::kNone: trainable_[p] = false; break;
      case TrainableMode::kHeadOnly: trainable_[p] = is_head_param(p); break;
    }
  }
}

template <typename T>
void BasicSpeechVGG<T>::check_input(const Tensor<T>& x) const {
  if (x.rank() != 4 || x.dim(1) != 1 || x.dim(2) != std::size_t(config_.input_height) ||
      x.dim(3) != std::size_t(config_.input_width) || x.dim(0) == 0)
    throw DataError("model input must be B x 1 x " + std::to_string(config_.input_height) + " x " +
                    std::to_string(config_.input_width) + ", got " + shape_str(x.shape()));
}

template <typename T>
Tensor<T> BasicSpeechVGG<T>::forward_to(const Tensor<T>& x, int last_layer, ForwardCache<T>* cache,
                                        PoolingTaps<T>* taps) const {
  check_input(x);
  if (last_layer < 0 || last_layer >= num_layers())
    throw UsageError("forward: layer index " + std::to_string(last_layer) + " out of range");
  if (cache) {
    cache->input = x;
    cache->outputs.assign(last_layer + 1, Tensor<T>());
    cache->argmax.assign(last_layer + 1, {});
  }
  Tensor<T> cur = x;
  int block = 0;
  for (int i = 0; i <= last_layer; ++i) {
    const LayerSpec& l = layers_[i];
    const auto [wi, bi] = layer_params_[i];
    Tensor<T> next;
    switch (l.kind) {
      case LayerKind::kConv3x3:
        next = conv3x3_forward(cur, params_[wi].value, params_[bi].value);
        break;
      case LayerKind::kReLU:
        next = relu_forward(cur);
        break;
      case LayerKind::kMaxPool2x2: {
        PoolOutput<T> pooled = maxpool2x2_forward(cur);
        if (cache) cache->argmax[i] = std::move(pooled.argmax);
        next = std::move(pooled.y);
        if (taps) taps->taps[block] = next;
        ++block;
        break;
      }
      case LayerKind::kFlatten:
        next = cur.reshaped({cur.dim(0), cur.size() / cur.dim(0)});
        break;
      case LayerKind::kDense:
        next = dense_forward(cur, params_[wi].value, params_[bi].value);
        break;
    }
    cur = std::move(next);
    if (cache) cache->outputs[i] = cur;
  }
  return cur;
}

template <typename T>
ForwardOutput<T> BasicSpeechVGG<T>::forward_with_taps(const Tensor<T>& x,
                                                      ForwardCache<T>* cache) const {
  ForwardOutput<T> out;
  out.logits = forward_to(x, logits_layer(), cache, &out.taps);
  return out;
}

template <typename T>
Tensor<T> BasicSpeechVGG<T>::embed(const Tensor<T>& x) const {
  Tensor<T> tap = forward_to(x, tap_layers_.back());
  return tap.reshaped({tap.dim(0), tap.size() / tap.dim(0)});
}

template <typename T>
Gradients<T> BasicSpeechVGG<T>::make_gradients() const {
  Gradients<T> g;
  g.grads.resize(params_.size());
  for (std::size_t p = 0; p < params_.size(); ++p)
    if (trainable_[p]) g.grads[p] = Tensor<T>(params_[p].value.shape());
  return g;
}

template <typename T>
Tensor<T> BasicSpeechVGG<T>::backward(const ForwardCache<T>& cache,
                                      std::span<const LayerGrad<T>> seeds, Gradients<T>* grads,
                                      bool want_input_grad) const {
  if (seeds.empty()) throw UsageError("backward: no seed gradients");
  int top = -1;
  for (const auto& s : seeds) {
    if (s.layer < 0 || s.layer >= num_layers())
      throw UsageError("backward: seed layer out of range");
    top = std::max(top, s.layer);
  }
  if (cache.outputs.size() < std::size_t(top + 1) || cache.input.empty())
    throw DataError("backward: missing saved activations (run forward with a cache first)");
  for (const auto& s : seeds) {
    if (cache.outputs[s.layer].shape() != s.grad.shape())
      throw DataError("backward: seed gradient shape " + shape_str(s.grad.shape()) +
                      " does not match layer " + layers_[s.layer].name);
  }
  if (grads && grads->grads.size() != params_.size())
    throw DataError("backward: gradient buffers do not match parameters");

  auto wants_param = [&](int p) {
    return grads && p >= 0 && trainable_[p] && !grads->grads[p].empty();
  };
  int lowest = top + 1;
  if (want_input_grad) {
    lowest = 0;
  } else {
    for (int i = 0; i <= top; ++i) {
      if (wants_param(layer_params_[i].first) || wants_param(layer_params_[i].second)) {
        lowest = i;
        break;
      }
    }
  }

  Tensor<T> g;
  for (int i = top; i >= lowest; --i) {
    for (const auto& s : seeds) {
      if (s.layer != i) continue;
      if (g.empty()) {
        g = s.grad;
      } else {
        for (std::size_t k = 0; k < g.size(); ++k) g[k] += s.grad[k];
      }
    }
    if (g.empty()) continue;
    const Tensor<T>& in = i == 0 ? cache.input : cache.outputs[i - 1];
    const bool need_dx = i > lowest || want_input_grad;
    const auto [wi, bi] = layer_params_[i];
    Tensor<T> dx;
    switch (layers_[i].kind) {
      case LayerKind::kConv3x3:
        dx = conv3x3_backward(in, params_[wi].value, g,
                              wants_param(wi) ? &grads->grads[wi] : nullptr,
                              wants_param(bi) ? &grads->grads[bi] : nullptr, need_dx);
        break;
      case LayerKind::kReLU:
        if (need_dx) dx = relu_backward(cache.outputs[i], g);
        break;
      case LayerKind::kMaxPool2x2:
        if (cache.argmax[i].empty()) throw DataError("backward: missing pooling argmax record");
        if (need_dx) dx = maxpool2x2_backward(in.shape(), cache.argmax[i], g);
        break;
      case LayerKind::kFlatten:
        if (need_dx) dx = g.reshaped(in.shape());
        break;
      case LayerKind::kDense:
        dx = dense_backward(in, params_[wi].value, g,
                            wants_param(wi) ? &grads->grads[wi] : nullptr,
                            wants_param(bi) ? &grads->grads[bi] : nullptr, need_dx);
        break;
    }
    g = std::move(dx);
  }
  return want_input_grad ? g : Tensor<T>();
}

template <typename T>
BasicSpeechVGG<T> BasicSpeechVGG<T>::swap_head(int new_num_classes, std::uint64_t seed) const {
  if (new_num_classes < 2) throw UsageError("swap_head: class count must be >= 2");
  ModelConfig cfg = config_;
  cfg.num_classes = new_num_classes;
  BasicSpeechVGG out = zeros(cfg);
  for (std::size_t p = 0; p < out.params_.size(); ++p) {
    if (out.is_head_param(p)) {
      out.init_param(p, seed, tag(SeedStream::kHead));
    } else {
      out.params_[p].value = params_[p].value;
    }
  }
  return out;
}

template class BasicSpeechVGG<float>;
template class BasicSpeechVGG<double>;

}  // namespace svgg

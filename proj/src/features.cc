// src/features.cc

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

#include "svgg/features.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include "svgg/error.h"

namespace svgg {
namespace {

template <typename T>
void check_pair(const BasicSpeechVGG<T>& model, const Tensor<T>& x, const Tensor<T>& y) {
  (void)model;
  if (x.shape() != y.shape())
    throw DataError("deep feature loss: input shapes differ " + shape_str(x.shape()) + " vs " +
                    shape_str(y.shape()));
}

template <typename T>
int top_tap_layer(const BasicSpeechVGG<T>& model, const TapMask& taps) {
  int top = -1;
  for (int b = 0; b < kNumBlocks; ++b)
    if (taps[b]) top = model.tap_layers()[b];
  if (top < 0) throw UsageError("deep feature loss: no taps selected");
  return top;
}

}  // namespace

template <typename T>
double deep_feature_loss(const BasicSpeechVGG<T>& model, const Tensor<T>& x, const Tensor<T>& y,
                         const TapMask& taps) {
  check_pair(model, x, y);
  const int top = top_tap_layer(model, taps);
  PoolingTaps<T> tx, ty;
  model.forward_to(x, top, nullptr, &tx);
  model.forward_to(y, top, nullptr, &ty);
  double loss = 0.0;
  for (int b = 0; b < kNumBlocks; ++b) {
    if (!taps[b]) continue;
    const auto& a = tx.taps[b];
    const auto& c = ty.taps[b];
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(double(a[i]) - double(c[i]));
    loss += sum / static_cast<double>(a.size());
  }
  return loss;
}

template <typename T>
FeatureLossOutput<T> deep_feature_loss_with_grad(const BasicSpeechVGG<T>& model, const Tensor<T>& x,
                                                 const Tensor<T>& y, const TapMask& taps) {
  check_pair(model, x, y);
  const int top = top_tap_layer(model, taps);
  PoolingTaps<T> tx, ty;
  ForwardCache<T> cache;
  model.forward_to(x, top, &cache, &tx);
  model.forward_to(y, top, nullptr, &ty);
  FeatureLossOutput<T> out;
  std::vector<LayerGrad<T>> seeds;
  for (int b = 0; b < kNumBlocks; ++b) {
    if (!taps[b]) continue;
    const auto& a = tx.taps[b];
    const auto& c = ty.taps[b];
    const double n = static_cast<double>(a.size());
    Tensor<T> g(a.shape());
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = double(a[i]) - double(c[i]);
      sum += std::abs(d);
      g[i] = static_cast<T>((d > 0 ? 1.0 : d < 0 ? -1.0 : 0.0) / n);
    }
    out.loss += sum / n;
    seeds.push_back({model.tap_layers()[b], std::move(g)});
  }
  out.grad_x = model.backward(cache, seeds, nullptr, true);
  return out;
}

template double deep_feature_loss(const BasicSpeechVGG<float>&, const Tensor<float>&,
                                  const Tensor<float>&, const TapMask&);
template double deep_feature_loss(const BasicSpeechVGG<double>&, const Tensor<double>&,
                                  const Tensor<double>&, const TapMask&);
template FeatureLossOutput<float> deep_feature_loss_with_grad(const BasicSpeechVGG<float>&,
                                                              const Tensor<float>&,
                                                              const Tensor<float>&, const TapMask&);
template FeatureLossOutput<double> deep_feature_loss_with_grad(const BasicSpeechVGG<double>&,
                                                               const Tensor<double>&,
                                                               const Tensor<double>&,
                                                               const TapMask&);

Canvas window_canvas(const AudioBuffer& audio, std::size_t start, const NormStats& stats,
                     const StftConfig& stft_cfg) {
  if (start >= audio.size()) throw DataError("window start beyond the end of the recording");
  WordAlignment span{"", "window", start, std::min(audio.size(), start + kWindowSamples)};
  const auto spec = normalize(log_magnitude(stft(extract_segment(audio, span), stft_cfg)), stats);
  return place_on_canvas(spec, 0, 0).canvas;
}

namespace {

void require_window(const AudioBuffer& audio, const char* what) {
  if (audio.size() < kWindowSamples)
    throw DataError(std::string(what) + ": recording shorter than 1024 ms (" +
                    std::to_string(audio.size()) + " samples)");
}

}  // namespace

Embedding embed_recording(const SpeechVGG& model, const AudioBuffer& audio, const NormStats& stats,
                          std::size_t num_segments, Rng& rng, const std::string& source) {
  require_window(audio, "embed_recording");
  if (num_segments < 1) throw UsageError("embed_recording: num_segments must be >= 1");
  Embedding e;
  e.source = source;
  e.num_segments = num_segments;
  std::uniform_int_distribution<std::size_t> start_dist(0, audio.size() - kWindowSamples);
  for (std::size_t i = 0; i < num_segments; ++i) e.segment_starts.push_back(start_dist(rng));

  std::vector<double> sum(model.config().embedding_dim(), 0.0);
  constexpr std::size_t kChunk = 8;
  for (std::size_t i = 0; i < num_segments; i += kChunk) {
    std::vector<Canvas> canvases;
    for (std::size_t j = i; j < std::min(num_segments, i + kChunk); ++j)
      canvases.push_back(window_canvas(audio, e.segment_starts[j], stats));
    const Tensor<float> emb = model.embed(stack_canvases<float>(canvases));
    const std::size_t d = emb.dim(1);
    for (std::size_t r = 0; r < canvases.size(); ++r)
      for (std::size_t k = 0; k < d; ++k) sum[k] += emb[r * d + k];
  }
  e.values.resize(sum.size());
  for (std::size_t k = 0; k < sum.size(); ++k)
    e.values[k] = static_cast<float>(sum[k] / static_cast<double>(num_segments));
  return e;
}

std::vector<std::size_t> sliding_window_starts(std::size_t num_samples) {
  if (num_samples < kWindowSamples)
    throw DataError("sliding window: recording shorter than 1024 ms");
  const std::size_t extra = num_samples - kWindowSamples;
  const std::size_t count = 1 + (extra + kWindowStride - 1) / kWindowStride;
  std::vector<std::size_t> starts(count);
  for (std::size_t i = 0; i < count; ++i) starts[i] = i * kWindowStride;
  return starts;
}

SlidingPrediction sliding_predictions(const SpeechVGG& model, const AudioBuffer& audio,
                                      const NormStats& stats) {
  require_window(audio, "sliding_predictions");
  SlidingPrediction out;
  out.window_starts = sliding_window_starts(audio.size());
  const std::size_t k = model.config().num_classes;
  out.distribution.assign(k, 0.0);
  for (std::size_t s : out.window_starts) {
    std::vector<Canvas> one{window_canvas(audio, s, stats)};
    const Tensor<float> p =
        softmax(model.forward_to(stack_canvases<float>(one), model.logits_layer()));
    for (std::size_t j = 0; j < k; ++j) out.distribution[j] += p[j];
  }
  for (auto& v : out.distribution) v /= static_cast<double>(out.window_starts.size());
  return out;
}

void write_embeddings_tsv(const std::string& path, const std::vector<Embedding>& embeddings) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out.precision(9);
  for (const auto& e : embeddings) {
    if (e.source.find_first_of("\t\n") != std::string::npos)
      throw DataError("recording id contains a tab or newline: " + e.source);
    out << e.source;
    for (float v : e.values) out << '\t' << v;
    out << '\n';
  }
}

std::vector<Embedding> read_embeddings_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<Embedding> out;
  std::string line;
  std::size_t lineno = 0, dim = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    Embedding e;
    std::getline(ss, e.source, '\t');
    std::string cell;
    while (std::getline(ss, cell, '\t')) {
      try {
        std::size_t used = 0;
        e.values.push_back(std::stof(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw DataError(path + ":" + std::to_string(lineno) + ": bad value '" + cell + "'");
      }
    }
    if (e.values.empty()) throw DataError(path + ":" + std::to_string(lineno) + ": no values");
    if (dim == 0) dim = e.values.size();
    if (e.values.size() != dim)
      throw DataError(path + ":" + std::to_string(lineno) + ": dimension mismatch");
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace svgg

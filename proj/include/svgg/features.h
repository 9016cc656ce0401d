// include/svgg/features.h

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

#ifndef SVGG_FEATURES_H_
#define SVGG_FEATURES_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "svgg/data.h"
#include "svgg/model.h"
#include "svgg/norm.h"
#include "svgg/random.h"
#include "svgg/stft.h"
#include "svgg/wav.h"

namespace svgg {

inline constexpr std::size_t kWindowSamples = 16384;  // 1024 ms
inline constexpr std::size_t kWindowStride = 8192;    // 512 ms

using TapMask = std::array<bool, kNumBlocks>;
inline constexpr TapMask kAllTaps = {true, true, true, true, true};

template <typename T>
struct FeatureLossOutput {
  double loss = 0.0;
  Tensor<T> grad_x;  // d loss / d x, shape of x
};

// Sum over the selected taps of the mean absolute tap difference. x and y
// are B x 1 x 128 x 128 batches on the same normalisation; the model is
// only read.
template <typename T>
double deep_feature_loss(const BasicSpeechVGG<T>& model, const Tensor<T>& x, const Tensor<T>& y,
                         const TapMask& taps = kAllTaps);

template <typename T>
FeatureLossOutput<T> deep_feature_loss_with_grad(const BasicSpeechVGG<T>& model, const Tensor<T>& x,
                                                 const Tensor<T>& y,
                                                 const TapMask& taps = kAllTaps);

// Canvas of samples [start, start + 1024 ms) (fewer if the audio ends
// earlier), placed at time offset 0 with trailing zero padding.
Canvas window_canvas(const AudioBuffer& audio, std::size_t start, const NormStats& stats,
                     const StftConfig& stft = {});

struct Embedding {
  std::vector<float> values;
  std::string source;
  std::size_t num_segments = 0;
  std::vector<std::size_t> segment_starts;
};

// Mean of the embeddings of `num_segments` 1024 ms windows whose start
// offsets are drawn uniformly (with replacement) from the valid range.
Embedding embed_recording(const SpeechVGG& model, const AudioBuffer& audio, const NormStats& stats,
                          std::size_t num_segments, Rng& rng, const std::string& source = {});

struct SlidingPrediction {
  std::vector<double> distribution;
  std::vector<std::size_t> window_starts;
};

// 1 + ceil((N - 1024 ms) / 512 ms) windows
std::vector<std::size_t> sliding_window_starts(std::size_t num_samples);

// Softmax outputs averaged over 1024 ms windows with 512 ms stride.
SlidingPrediction sliding_predictions(const SpeechVGG& model, const AudioBuffer& audio,
                                      const NormStats& stats);

// recording_id<TAB>v0<TAB>...<TAB>vD per line.
void write_embeddings_tsv(const std::string& path, const std::vector<Embedding>& embeddings);
std::vector<Embedding> read_embeddings_tsv(const std::string& path);

}  // namespace svgg

#endif  // SVGG_FEATURES_H_

// include/svgg/dream.h

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

#ifndef SVGG_DREAM_H_
#define SVGG_DREAM_H_

#include <cstdint>
#include <string>
#include <vector>

#include "svgg/data.h"
#include "svgg/model.h"

namespace svgg {

struct DreamConfig {
  std::string layer = "5";  // tap index 1..5 or a layer name such as "block3_conv2"
  int steps = 200;
  double step_size = 0.05;
  std::uint64_t seed = 0;
  double smoothing_sigma = 0.0;  // Gaussian blur of the input; 0 disables
  int smoothing_every = 0;       // apply the blur every k steps

  void validate() const;
};

// Chain index of the layer a DreamConfig refers to; UsageError if invalid.
int resolve_dream_layer(const SpeechVGG& model, const std::string& layer);

struct DreamResult {
  Canvas canvas;
  std::vector<double> trace;  // mean activation before each step, then final
};

// Gradient ascent on the input from seeded unit Gaussian noise; each step
// moves by step_size along the gradient rescaled to unit RMS.
DreamResult maximize_activation(const SpeechVGG& model, const DreamConfig& config);

// Separable Gaussian blur with clamped borders.
Canvas gaussian_blur(const Canvas& canvas, double sigma);

// Min-max scaling to 0..255; a constant canvas renders as 128 everywhere.
std::vector<std::uint8_t> quantize_canvas(const Canvas& canvas);

// Binary PGM: "P5\n<cols> <rows>\n255\n" followed by row-major bytes.
void render_pgm(const Canvas& canvas, const std::string& path);
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};
GrayImage read_pgm(const std::string& path);

void write_canvas_csv(const Canvas& canvas, const std::string& path);
void write_trace_csv(const std::vector<double>& trace, const std::string& path);

}  // namespace svgg

#endif  // SVGG_DREAM_H_

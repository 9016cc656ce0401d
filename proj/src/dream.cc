// src/dream.cc

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

#include "svgg/dream.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "svgg/error.h"
#include "svgg/random.h"

namespace svgg {

void DreamConfig::validate() const {
  if (steps < 1) throw UsageError("dream.steps must be >= 1");
  if (!(step_size >= 0.0)) throw UsageError("dream.step_size must be >= 0");
  if (smoothing_sigma < 0.0 || smoothing_every < 0)
    throw UsageError("dream smoothing parameters must be >= 0");
}

int resolve_dream_layer(const SpeechVGG& model, const std::string& layer) {
  if (!layer.empty() && std::all_of(layer.begin(), layer.end(), ::isdigit)) {
    const int tap = std::stoi(layer);
    if (tap < 1 || tap > kNumBlocks)
      throw UsageError("dream layer " + layer + " out of range (taps are 1..5)");
    return model.tap_layers()[tap - 1];
  }
  const int idx = model.layer_index(layer);
  if (idx < 0) throw UsageError("dream layer '" + layer + "' does not exist");
  return idx;
}

DreamResult maximize_activation(const SpeechVGG& model, const DreamConfig& config) {
  config.validate();
  const int target = resolve_dream_layer(model, config.layer);
  const std::size_t h = model.config().input_height, w = model.config().input_width;

  Tensor<float> x({1, 1, h, w});
  Rng rng = make_rng(config.seed, {tag(SeedStream::kDream)});
  std::normal_distribution<double> noise(0.0, 1.0);
  for (auto& v : x.values()) v = static_cast<float>(noise(rng));

  DreamResult out;
  auto mean_of = [](const Tensor<float>& t) {
    double s = 0.0;
    for (float v : t.values()) s += v;
    return s / static_cast<double>(t.size());
  };
  for (int step = 0; step < config.steps; ++step) {
    ForwardCache<float> cache;
    const Tensor<float> act = model.forward_to(x, target, &cache);
    out.trace.push_back(mean_of(act));
    if (config.step_size == 0.0) continue;
    const LayerGrad<float> seed{target, Tensor<float>(act.shape(), 1.0f / float(act.size()))};
    const Tensor<float> g =
        model.backward(cache, std::span<const LayerGrad<float>>(&seed, 1), nullptr, true);
    double ss = 0.0;
    for (float v : g.values()) ss += double(v) * v;
    const double rms = std::sqrt(ss / static_cast<double>(g.size()));
    if (rms > 0.0) {
      const double scale = config.step_size / rms;
      for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<float>(x[i] + scale * g[i]);
    }
    if (config.smoothing_sigma > 0.0 && config.smoothing_every > 0 &&
        (step + 1) % config.smoothing_every == 0) {
      Canvas c(h, w);
      std::memcpy(c.data(), x.data(), x.size() * sizeof(float));
      c = gaussian_blur(c, config.smoothing_sigma);
      std::memcpy(x.data(), c.data(), x.size() * sizeof(float));
    }
  }
  out.trace.push_back(mean_of(model.forward_to(x, target)));
  out.canvas = Canvas(h, w);
  std::memcpy(out.canvas.data(), x.data(), x.size() * sizeof(float));
  return out;
}

Canvas gaussian_blur(const Canvas& canvas, double sigma) {
  if (sigma <= 0.0) return canvas;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) sum += k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (auto& v : k) v /= sum;
  const int rows = static_cast<int>(canvas.rows()), cols = static_cast<int>(canvas.cols());
  Canvas tmp(rows, cols), out(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      double s = 0.0;
      for (int i = -radius; i <= radius; ++i)
        s += k[i + radius] * canvas(r, std::clamp(c + i, 0, cols - 1));
      tmp(r, c) = static_cast<float>(s);
    }
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      double s = 0.0;
      for (int i = -radius; i <= radius; ++i)
        s += k[i + radius] * tmp(std::clamp(r + i, 0, rows - 1), c);
      out(r, c) = static_cast<float>(s);
    }
  return out;
}

std::vector<std::uint8_t> quantize_canvas(const Canvas& canvas) {
  const double lo = canvas.minCoeff(), hi = canvas.maxCoeff();
  std::vector<std::uint8_t> px(canvas.size());
  for (Eigen::Index i = 0; i < canvas.size(); ++i) {
    if (!(hi > lo)) {
      px[i] = 128;
      continue;
    }
    const double v = std::round(255.0 * (canvas.data()[i] - lo) / (hi - lo));
    px[i] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
  }
  return px;
}

void render_pgm(const Canvas& canvas, const std::string& path) {
  const auto px = quantize_canvas(canvas);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << "P5\n" << canvas.cols() << ' ' << canvas.rows() << "\n255\n";
  out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (!out) throw DataError("write failed: " + path);
}

GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::string magic;
  int maxval = 0;
  GrayImage img;
  in >> magic >> img.width >> img.height >> maxval;
  if (magic != "P5" || img.width <= 0 || img.height <= 0 || maxval != 255)
    throw DataError(path + ": not an 8-bit binary PGM");
  in.get();  // single whitespace after the header
  img.pixels.resize(std::size_t(img.width) * img.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
    throw DataError(path + ": truncated PGM");
  return img;
}

void write_canvas_csv(const Canvas& canvas, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out.precision(9);
  for (Eigen::Index r = 0; r < canvas.rows(); ++r) {
    for (Eigen::Index c = 0; c < canvas.cols(); ++c) out << (c ? "," : "") << canvas(r, c);
    out << '\n';
  }
}

void write_trace_csv(const std::vector<double>& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out.precision(12);
  out << "step,mean_activation\n";
  for (std::size_t i = 0; i < trace.size(); ++i) out << i << ',' << trace[i] << '\n';
}

}  // namespace svgg

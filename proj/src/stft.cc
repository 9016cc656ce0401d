// src/stft.cc

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

#include "svgg/stft.h"

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "svgg/error.h"

namespace svgg {

int StftConfig::num_frames(std::size_t num_samples) const {
  if (num_samples < static_cast<std::size_t>(window_len)) return 0;
  return static_cast<int>((num_samples - window_len) / hop) + 1;
}

void StftConfig::validate() const {
  if (window_len < 2) throw UsageError("stft: window_len must be >= 2");
  if (hop < 1 || hop > window_len) throw UsageError("stft: hop must be in [1, window_len]");
  if (num_bins < 1 || num_bins > onesided_bins())
    throw UsageError("stft: num_bins must be in [1, window_len/2 + 1]");
}

std::vector<double> make_window(const StftConfig& cfg) {
  std::vector<double> w(cfg.window_len, 1.0);
  if (cfg.window == WindowFn::kHann) {
    for (int n = 0; n < cfg.window_len; ++n)
      w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / cfg.window_len);
  }
  return w;
}

ComplexSpectrogram stft(const AudioBuffer& audio, const StftConfig& cfg) {
  cfg.validate();
  if (audio.samples.size() < static_cast<std::size_t>(cfg.window_len))
    throw DataError("stft: input shorter than one window (" +
                    std::to_string(audio.samples.size()) + " < " +
                    std::to_string(cfg.window_len) + " samples)");
  const int frames = cfg.num_frames(audio.samples.size());
  const int half = cfg.onesided_bins();
  const std::vector<double> window = make_window(cfg);

  ComplexSpectrogram out;
  out.config = cfg;
  out.signal_length = audio.samples.size();
  out.full.resize(half, frames);

  Eigen::FFT<double> fft;
  std::vector<double> frame(cfg.window_len);
  std::vector<std::complex<double>> bins;
  for (int t = 0; t < frames; ++t) {
    const std::size_t start = static_cast<std::size_t>(t) * cfg.hop;
    for (int n = 0; n < cfg.window_len; ++n)
      frame[n] = window[n] * audio.samples[start + n];
    fft.fwd(bins, frame);
    for (int k = 0; k < half; ++k) out.full(k, t) = bins[k];
  }
  out.values = out.full.topRows(cfg.num_bins);
  return out;
}

std::pair<std::size_t, std::size_t> istft_interior(const ComplexSpectrogram& spec) {
  const auto& cfg = spec.config;
  const std::size_t frames = spec.full.cols();
  if (frames == 0) return {0, 0};
  const std::size_t len = (frames - 1) * cfg.hop + cfg.window_len;
  const std::size_t edge = static_cast<std::size_t>(cfg.window_len - cfg.hop);
  if (frames < 2 || edge == 0) return {0, len};
  return {static_cast<std::size_t>(cfg.hop), len - cfg.hop};
}

AudioBuffer istft(const ComplexSpectrogram& spec) {
  const auto& cfg = spec.config;
  const int frames = static_cast<int>(spec.full.cols());
  const int n = cfg.window_len;
  if (spec.full.rows() != cfg.onesided_bins())
    throw DataError("istft: spectrogram lacks the full one-sided bin set");

  AudioBuffer out;
  if (frames == 0) return out;
  const std::size_t len = static_cast<std::size_t>(frames - 1) * cfg.hop + n;
  std::vector<double> acc(len, 0.0), weight(len, 0.0);
  const std::vector<double> window = make_window(cfg);

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> bins(n);
  std::vector<double> frame;
  for (int t = 0; t < frames; ++t) {
    for (int k = 0; k < cfg.onesided_bins(); ++k) bins[k] = spec.full(k, t);
    for (int k = cfg.onesided_bins(); k < n; ++k) bins[k] = std::conj(bins[n - k]);
    fft.inv(frame, bins);
    const std::size_t start = static_cast<std::size_t>(t) * cfg.hop;
    for (int i = 0; i < n; ++i) {
      acc[start + i] += window[i] * frame[i];
      weight[start + i] += window[i] * window[i];
    }
  }
  out.samples.resize(len);
  for (std::size_t i = 0; i < len; ++i)
    out.samples[i] = weight[i] > 1e-8 ? static_cast<float>(acc[i] / weight[i]) : 0.0f;
  return out;
}

LogMagSpectrogram log_magnitude(const ComplexSpectrogram& spec) {
  LogMagSpectrogram out;
  out.values = spec.values.unaryExpr(
      [](const std::complex<double>& c) { return std::log(std::abs(c) + kMagnitudeFloor); });
  return out;
}

}  // namespace svgg

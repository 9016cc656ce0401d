// include/svgg/stft.h

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

#ifndef SVGG_STFT_H_
#define SVGG_STFT_H_

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "svgg/wav.h"

namespace svgg {

using ComplexMatrix =
    Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RealMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class WindowFn { kHann, kRectangular };

struct StftConfig {
  int window_len = 256;
  int hop = 128;
  int num_bins = 128;  // bins 0..num_bins-1 are kept; Nyquist is dropped by default
  WindowFn window = WindowFn::kHann;

  int onesided_bins() const { return window_len / 2 + 1; }
  int num_frames(std::size_t num_samples) const;
  void validate() const;  // throws UsageError
};

// Periodic window of length cfg.window_len.
std::vector<double> make_window(const StftConfig& cfg);

// Rows are frequency bins, columns are frames.
struct ComplexSpectrogram {
  ComplexMatrix values;  // num_bins x num_frames
  ComplexMatrix full;    // onesided_bins x num_frames, kept for resynthesis
  StftConfig config;
  std::size_t signal_length = 0;

  int num_bins() const { return static_cast<int>(values.rows()); }
  int num_frames() const { return static_cast<int>(values.cols()); }
};

struct LogMagSpectrogram {
  RealMatrix values;  // num_bins x num_frames
  bool normalized = false;

  int num_bins() const { return static_cast<int>(values.rows()); }
  int num_frames() const { return static_cast<int>(values.cols()); }
};

inline constexpr double kMagnitudeFloor = 1e-9;

// Frames are strictly interior: frame t covers [t*hop, t*hop + window_len).
ComplexSpectrogram stft(const AudioBuffer& audio, const StftConfig& cfg = {});

// Weighted overlap-add resynthesis from the full one-sided spectrum. Samples
// not covered by any nonzero window weight come back as zero.
AudioBuffer istft(const ComplexSpectrogram& spec);

// Range [begin, end) of istft output covered by overlapping windows.
std::pair<std::size_t, std::size_t> istft_interior(const ComplexSpectrogram& spec);

// cell = ln(|value| + kMagnitudeFloor)
LogMagSpectrogram log_magnitude(const ComplexSpectrogram& spec);

}  // namespace svgg

#endif  // SVGG_STFT_H_

// include/svgg/norm.h

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

#ifndef SVGG_NORM_H_
#define SVGG_NORM_H_

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "svgg/stft.h"

namespace svgg {

inline constexpr double kStdFloor = 1e-6;

// Per-frequency-channel statistics of log-magnitude spectrograms.
struct NormStats {
  std::vector<double> mean;
  std::vector<double> std;

  int num_bins() const { return static_cast<int>(mean.size()); }

  nlohmann::json to_json() const;
  static NormStats from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static NormStats load(const std::string& path);
};

// Streaming per-channel mean/variance (Welford). Partial accumulators built
// on disjoint data can be merged.
class NormAccumulator {
 public:
  void add(const LogMagSpectrogram& spec);
  void merge(const NormAccumulator& other);
  NormStats finish() const;  // population std, floored at kStdFloor
  bool empty() const { return count_ == 0; }

 private:
  std::size_t count_ = 0;  // frames seen
  std::vector<double> mean_;
  std::vector<double> m2_;
};

NormStats compute_norm_stats(std::span<const LogMagSpectrogram> specs);

LogMagSpectrogram normalize(const LogMagSpectrogram& spec, const NormStats& stats);
LogMagSpectrogram denormalize(const LogMagSpectrogram& spec, const NormStats& stats);

}  // namespace svgg

#endif  // SVGG_NORM_H_

// src/norm.cc

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

#include "svgg/norm.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "svgg/error.h"

namespace svgg {

nlohmann::json NormStats::to_json() const {
  return {{"num_bins", num_bins()}, {"mean", mean}, {"std", std}};
}

NormStats NormStats::from_json(const nlohmann::json& j) {
  NormStats s;
  try {
    const int bins = j.at("num_bins").get<int>();
    s.mean = j.at("mean").get<std::vector<double>>();
    s.std = j.at("std").get<std::vector<double>>();
    if (static_cast<int>(s.mean.size()) != bins || static_cast<int>(s.std.size()) != bins)
      throw DataError("norm stats: vector lengths do not match num_bins");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("norm stats: ") + e.what());
  }
  for (double v : s.std)
    if (!(v >= kStdFloor)) throw DataError("norm stats: std entry below floor");
  return s;
}

void NormStats::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << to_json().dump(1) << '\n';
}

NormStats NormStats::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  return from_json(j);
}

void NormAccumulator::add(const LogMagSpectrogram& spec) {
  const int bins = spec.num_bins();
  if (mean_.empty() && count_ == 0) {
    mean_.assign(bins, 0.0);
    m2_.assign(bins, 0.0);
  } else if (static_cast<int>(mean_.size()) != bins) {
    throw DataError("norm stats: bin count mismatch across spectrograms");
  }
  for (int t = 0; t < spec.num_frames(); ++t) {
    ++count_;
    const double n = static_cast<double>(count_);
    for (int f = 0; f < bins; ++f) {
      const double x = spec.values(f, t);
      const double d = x - mean_[f];
      mean_[f] += d / n;
      m2_[f] += d * (x - mean_[f]);
    }
  }
}

void NormAccumulator::merge(const NormAccumulator& other) {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  if (mean_.size() != other.mean_.size())
    throw DataError("norm stats: cannot merge accumulators with different bin counts");
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  for (std::size_t f = 0; f < mean_.size(); ++f) {
    const double d = other.mean_[f] - mean_[f];
    mean_[f] += d * nb / n;
    m2_[f] += other.m2_[f] + d * d * na * nb / n;
  }
  count_ += other.count_;
}

NormStats NormAccumulator::finish() const {
  if (count_ == 0) throw DataError("norm stats: empty stream");
  NormStats s;
  s.mean = mean_;
  s.std.resize(mean_.size());
  for (std::size_t f = 0; f < mean_.size(); ++f)
    s.std[f] = std::max(std::sqrt(std::max(m2_[f], 0.0) / count_), kStdFloor);
  return s;
}

NormStats compute_norm_stats(std::span<const LogMagSpectrogram> specs) {
  if (specs.empty()) throw DataError("norm stats: empty stream");
  NormAccumulator acc;
  for (const auto& s : specs) acc.add(s);
  return acc.finish();
}

namespace {

void check_bins(const LogMagSpectrogram& spec, const NormStats& stats) {
  if (spec.num_bins() != stats.num_bins() || stats.std.size() != stats.mean.size())
    throw DataError("normalize: spectrogram has " + std::to_string(spec.num_bins()) +
                    " bins, stats have " + std::to_string(stats.num_bins()));
}

}  // namespace

LogMagSpectrogram normalize(const LogMagSpectrogram& spec, const NormStats& stats) {
  if (spec.normalized) throw DataError("normalize: spectrogram is already normalized");
  check_bins(spec, stats);
  LogMagSpectrogram out = spec;
  for (int f = 0; f < spec.num_bins(); ++f)
    out.values.row(f) = (spec.values.row(f).array() - stats.mean[f]) / stats.std[f];
  out.normalized = true;
  return out;
}

LogMagSpectrogram denormalize(const LogMagSpectrogram& spec, const NormStats& stats) {
  if (!spec.normalized) throw DataError("denormalize: spectrogram is not normalized");
  check_bins(spec, stats);
  LogMagSpectrogram out = spec;
  for (int f = 0; f < spec.num_bins(); ++f)
    out.values.row(f) = spec.values.row(f).array() * stats.std[f] + stats.mean[f];
  out.normalized = false;
  return out;
}

}  // namespace svgg

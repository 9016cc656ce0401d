// src/augment.cc

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

#include "svgg/augment.h"

#include <cmath>

#include "svgg/error.h"

namespace svgg {

void AugmentPolicy::validate() const {
  if (!(max_fraction_per_dim >= 0.0 && max_fraction_per_dim <= 1.0))
    throw UsageError("augment: max_fraction_per_dim must be in [0, 1]");
  if (num_time_masks < 0 || num_freq_masks < 0)
    throw UsageError("augment: mask counts must be >= 0");
}

nlohmann::json AugmentPolicy::to_json() const {
  return {{"max_fraction_per_dim", max_fraction_per_dim},
          {"num_time_masks", num_time_masks},
          {"num_freq_masks", num_freq_masks},
          {"fill", "example_mean"}};
}

AugmentPolicy AugmentPolicy::from_json(const nlohmann::json& j) {
  AugmentPolicy p;
  if (!j.is_object()) throw UsageError("augment: expected an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "max_fraction_per_dim") p.max_fraction_per_dim = value.get<double>();
    else if (key == "num_time_masks") p.num_time_masks = value.get<int>();
    else if (key == "num_freq_masks") p.num_freq_masks = value.get<int>();
    else if (key == "fill") {
      if (value.get<std::string>() != "example_mean")
        throw UsageError("augment.fill: only 'example_mean' is supported");
    } else {
      throw UsageError("unknown config key 'augment." + key + "'");
    }
  }
  p.validate();
  return p;
}

namespace {

std::vector<MaskSpan> draw_masks(int count, int size, double max_fraction, Rng& rng) {
  std::vector<MaskSpan> masks;
  if (count == 0) return masks;
  const int cap = static_cast<int>(std::floor(max_fraction * size));
  const int max_width = cap / count;
  std::uniform_int_distribution<int> width_dist(0, max_width);
  for (int i = 0; i < count; ++i) {
    const int w = width_dist(rng);
    std::uniform_int_distribution<int> start_dist(0, size - w);
    masks.push_back({start_dist(rng), w});
  }
  return masks;
}

}  // namespace

Canvas spec_augment(const Canvas& canvas, const AugmentPolicy& policy, Rng& rng,
                    AugmentRecord* record) {
  policy.validate();
  if (canvas.rows() != kCanvasSize || canvas.cols() != kCanvasSize)
    throw DataError("spec_augment: canvas must be 128x128");
  AugmentRecord rec;
  rec.fill = static_cast<float>(canvas.cast<double>().mean());
  rec.freq_masks = draw_masks(policy.num_freq_masks, kCanvasSize,
                              policy.max_fraction_per_dim, rng);
  rec.time_masks = draw_masks(policy.num_time_masks, kCanvasSize,
                              policy.max_fraction_per_dim, rng);
  Canvas out = canvas;
  for (const auto& m : rec.freq_masks)
    if (m.width > 0) out.middleRows(m.start, m.width).setConstant(rec.fill);
  for (const auto& m : rec.time_masks)
    if (m.width > 0) out.middleCols(m.start, m.width).setConstant(rec.fill);
  if (record) *record = std::move(rec);
  return out;
}

double masked_fraction(const AugmentRecord& record, int axis, int size) {
  std::vector<bool> hit(size, false);
  for (const auto& m : axis == 0 ? record.freq_masks : record.time_masks)
    for (int i = m.start; i < m.start + m.width; ++i) hit[i] = true;
  int n = 0;
  for (bool h : hit) n += h;
  return static_cast<double>(n) / size;
}

}  // namespace svgg

// include/svgg/augment.h

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

#ifndef SVGG_AUGMENT_H_
#define SVGG_AUGMENT_H_

#include <vector>

#include <nlohmann/json.hpp>

#include "svgg/data.h"
#include "svgg/random.h"

namespace svgg {

enum class MaskFill { kExampleMean };

struct AugmentPolicy {
  double max_fraction_per_dim = 0.5;
  int num_time_masks = 2;
  int num_freq_masks = 2;
  MaskFill fill = MaskFill::kExampleMean;

  void validate() const;
  nlohmann::json to_json() const;
  // Unknown keys raise UsageError.
  static AugmentPolicy from_json(const nlohmann::json& j);
};

struct MaskSpan {
  int start = 0;
  int width = 0;
};

struct AugmentRecord {
  std::vector<MaskSpan> freq_masks;  // canvas rows
  std::vector<MaskSpan> time_masks;  // canvas columns
  float fill = 0.0f;
};

// Block masking over both axes. Each mask width is uniform in
// [0, cap / num_masks] with cap = floor(max_fraction * size), so the union of
// the masks per axis never exceeds the cap. Masked cells get the mean of the
// input canvas; all other cells are copied unchanged.
Canvas spec_augment(const Canvas& canvas, const AugmentPolicy& policy, Rng& rng,
                    AugmentRecord* record = nullptr);

// Fraction of rows (axis 0) or columns (axis 1) touched by the record's masks.
double masked_fraction(const AugmentRecord& record, int axis, int size = kCanvasSize);

}  // namespace svgg

#endif  // SVGG_AUGMENT_H_

// tests/test_augment.cc

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

#include <random>

#include <gtest/gtest.h>

#include "svgg/augment.h"
#include "svgg/error.h"

namespace svgg {
namespace {

Canvas random_canvas(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, 1.0f);
  Canvas c(kCanvasSize, kCanvasSize);
  for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = g(rng);
  return c;
}

bool in_masks(const std::vector<MaskSpan>& masks, int i) {
  for (const auto& m : masks)
    if (i >= m.start && i < m.start + m.width) return true;
  return false;
}

TEST(SpecAugment, ZeroFractionIsIdentity) {
  AugmentPolicy p;
  p.max_fraction_per_dim = 0.0;
  const Canvas c = random_canvas(1);
  for (int s = 0; s < 50; ++s) {
    Rng rng(s);
    EXPECT_TRUE(spec_augment(c, p, rng) == c);
  }
  p = AugmentPolicy{};
  p.num_freq_masks = p.num_time_masks = 0;
  Rng rng(3);
  EXPECT_TRUE(spec_augment(c, p, rng) == c);
}

TEST(SpecAugment, SingleFrequencyMaskFillsRowsWithCanvasMean) {
  AugmentPolicy p;
  p.num_freq_masks = 1;
  p.num_time_masks = 0;
  const Canvas c = random_canvas(2);
  const float mean = c.mean();
  for (int s = 0; s < 20; ++s) {
    Rng rng(s);
    AugmentRecord rec;
    const Canvas out = spec_augment(c, p, rng, &rec);
    ASSERT_EQ(rec.freq_masks.size(), 1u);
    EXPECT_EQ(rec.fill, mean);
    for (int f = 0; f < kCanvasSize; ++f) {
      const bool masked = in_masks(rec.freq_masks, f);
      for (int t = 0; t < kCanvasSize; ++t)
        EXPECT_EQ(out(f, t), masked ? mean : c(f, t));
    }
  }
}

TEST(SpecAugment, CapHoldsOverManyDrawsAndOutsideCellsArePreserved) {
  const AugmentPolicy p;
  const Canvas c = random_canvas(3);
  double worst_f = 0.0, worst_t = 0.0;
  for (int s = 0; s < 2000; ++s) {
    Rng rng = make_rng(99, {std::uint64_t(s)});
    AugmentRecord rec;
    const Canvas out = spec_augment(c, p, rng, &rec);
    worst_f = std::max(worst_f, masked_fraction(rec, 0));
    worst_t = std::max(worst_t, masked_fraction(rec, 1));
    if (s % 100 == 0) {
      for (int f = 0; f < kCanvasSize; ++f)
        for (int t = 0; t < kCanvasSize; ++t) {
          const bool masked = in_masks(rec.freq_masks, f) || in_masks(rec.time_masks, t);
          EXPECT_EQ(out(f, t), masked ? rec.fill : c(f, t));
        }
    }
  }
  EXPECT_LE(worst_f, 0.5);
  EXPECT_LE(worst_t, 0.5);
  EXPECT_GT(worst_f, 0.3);
}

TEST(SpecAugment, Deterministic) {
  const AugmentPolicy p;
  const Canvas c = random_canvas(4);
  Rng a(17), b(17);
  EXPECT_TRUE(spec_augment(c, p, a) == spec_augment(c, p, b));
}

TEST(SpecAugment, PolicyJson) {
  AugmentPolicy p;
  p.max_fraction_per_dim = 0.25;
  p.num_time_masks = 3;
  const AugmentPolicy r = AugmentPolicy::from_json(p.to_json());
  EXPECT_EQ(r.max_fraction_per_dim, 0.25);
  EXPECT_EQ(r.num_time_masks, 3);
  EXPECT_THROW(AugmentPolicy::from_json({{"max_frac", 0.1}}), UsageError);
  EXPECT_THROW(AugmentPolicy::from_json({{"max_fraction_per_dim", 1.5}}), UsageError);
  EXPECT_THROW(AugmentPolicy::from_json({{"num_time_masks", -1}}), UsageError);
}

}  // namespace
}  // namespace svgg

// include/svgg/random.h

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

#ifndef SVGG_RANDOM_H_
#define SVGG_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace svgg {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent streams from a root seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic child seed for a consumer identified by `tags`.
inline std::uint64_t derive_seed(std::uint64_t root,
                                 std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = mix_seed(root);
  for (std::uint64_t t : tags) s = mix_seed(s ^ mix_seed(t + 0x632be59bd9b4e019ULL));
  return s;
}

inline Rng make_rng(std::uint64_t root, std::initializer_list<std::uint64_t> tags = {}) {
  return Rng(derive_seed(root, tags));
}

// Stream tags for the consumers of a root seed.
enum class SeedStream : std::uint64_t {
  kInit = 1,
  kShuffle,
  kPad,
  kAugment,
  kHead,
  kSegments,
  kDream,
  kSynth,
};

inline std::uint64_t tag(SeedStream s) { return static_cast<std::uint64_t>(s); }

}  // namespace svgg

#endif  // SVGG_RANDOM_H_

// include/svgg/wav.h

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

#ifndef SVGG_WAV_H_
#define SVGG_WAV_H_

#include <string>
#include <vector>

namespace svgg {

inline constexpr int kSampleRate = 16000;

struct AudioBuffer {
  std::vector<float> samples;  // amplitudes in [-1, 1]
  int sample_rate = kSampleRate;

  std::size_t size() const { return samples.size(); }
  double duration_ms() const { return 1000.0 * samples.size() / sample_rate; }
};

// Reads a RIFF PCM16 little-endian mono 16 kHz file; samples are divided by
// 32768. Anything else raises DataError with a message naming the problem.
AudioBuffer load_wav(const std::string& path);

// Writes PCM16 mono; amplitudes are rounded and clipped to the int16 range.
void write_wav(const std::string& path, const AudioBuffer& audio);

}  // namespace svgg

#endif  // SVGG_WAV_H_

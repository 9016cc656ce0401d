// include/svgg/checkpoint.h

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

#ifndef SVGG_CHECKPOINT_H_
#define SVGG_CHECKPOINT_H_

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "svgg/model.h"
#include "svgg/norm.h"

namespace svgg {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// A trained extractor together with the normalisation it expects.
//
// File layout (little-endian):
//   "SVGG" | u32 version | u64 header_len | header JSON (UTF-8)
//   then per blob: u32 name_len | name | u8 rank | u64 dims[rank]
//                  | f32 data[prod(dims)] | u32 crc32(data bytes)
// The header carries {format_version, config, norm_stats, dictionary_hash,
// metadata, trainable, blobs: [{name, shape}]}.
struct Checkpoint {
  SpeechVGG model = SpeechVGG::zeros(ModelConfig{});
  NormStats stats;
  std::uint64_t dictionary_hash = 0;
  nlohmann::json metadata = nlohmann::json::object();
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
std::string serialize_checkpoint(const Checkpoint& ckpt);

// Throws DataError on bad magic, version mismatch, checksum failure (naming
// the blob), missing or unexpected blobs, or blob shapes that disagree with
// the header config.
Checkpoint load_checkpoint(const std::string& path);
Checkpoint deserialize_checkpoint(const std::string& bytes);

std::uint32_t crc32_bytes(const void* data, std::size_t len);

}  // namespace svgg

#endif  // SVGG_CHECKPOINT_H_

// include/svgg/config.h

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

#ifndef SVGG_CONFIG_H_
#define SVGG_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "svgg/augment.h"
#include "svgg/dream.h"
#include "svgg/logreg.h"
#include "svgg/model.h"
#include "svgg/stft.h"
#include "svgg/train.h"

namespace svgg {

struct DatasetSection {
  std::string train_manifest;
  std::string val_manifest;
  int dictionary_size = 1000;
  int min_word_length = 4;
};

struct FeaturesSection {
  int num_segments = 20;
  std::vector<int> taps{1, 2, 3, 4, 5};  // deep feature loss taps, 1-based
  LogRegConfig classifier;
};

// Whole-run configuration. Sections mirror the module defaults; `seed` is
// the root seed handed to every consumer that does not set its own.
struct CliConfig {
  std::uint64_t seed = 0;
  DatasetSection dataset;
  StftConfig stft;
  AugmentPolicy augment;
  ModelConfig model;
  TrainConfig train;
  FeaturesSection features;
  DreamConfig dream;

  nlohmann::json to_json() const;
  // Unknown keys at any level raise UsageError naming the key.
  static CliConfig from_json(const nlohmann::json& j);
  static CliConfig load(const std::string& path);

  // Overrides the root seed and every per-section seed.
  void set_seed(std::uint64_t s);
  void write_resolved(const std::string& dir) const;
};

StftConfig stft_from_json(const nlohmann::json& j);
nlohmann::json stft_to_json(const StftConfig& c);
DreamConfig dream_from_json(const nlohmann::json& j);
nlohmann::json dream_to_json(const DreamConfig& c);

}  // namespace svgg

#endif  // SVGG_CONFIG_H_

// include/svgg/train.h

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

#ifndef SVGG_TRAIN_H_
#define SVGG_TRAIN_H_

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "svgg/augment.h"
#include "svgg/checkpoint.h"
#include "svgg/data.h"
#include "svgg/model.h"
#include "svgg/norm.h"
#include "svgg/stft.h"

namespace svgg {

struct TrainConfig {
  int epochs = 30;
  double lr = 5e-5;
  int batch_size = 64;
  std::uint64_t seed = 0;
  AugmentPolicy augment_policy;
  bool augment_enabled = true;       // pre-training
  bool augment_in_finetune = false;  // fine_tune() ignores augment_enabled
  int eval_every = 0;                // extra validation every N steps; 0 = per epoch only
  int workers = 1;                   // preprocessing threads
  bool verify_frozen = false;        // assert frozen parameters after every step

  void validate() const;
  // Keys of the `train` config section; the policy is not part of it.
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j, TrainConfig base);
  static TrainConfig from_json(const nlohmann::json& j) { return from_json(j, TrainConfig()); }
};

struct StepRecord {
  std::int64_t step = 0;
  int epoch = 0;
  double loss = 0.0;
  // Running accuracy over the epoch so far.
  double train_acc = std::numeric_limits<double>::quiet_NaN();
  // Set on steps that ran a validation pass.
  double val_acc = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
};

struct MetricsLog {
  std::vector<StepRecord> steps;

  // step,epoch,loss,train_acc,val_acc,seconds ; NaN cells are left empty.
  std::string to_csv() const;
  void write_csv(const std::string& path) const;
};

struct TrainResult {
  Checkpoint best;  // highest validation accuracy (final model without validation data)
  double best_val_acc = std::numeric_limits<double>::quiet_NaN();
  MetricsLog log;
};

using StepCallback = std::function<void(const StepRecord&)>;

// Log-magnitude (not yet normalised) spectrograms of every manifest word.
struct SpectrogramSet {
  std::vector<LogMagSpectrogram> specs;
  std::vector<int> labels;

  std::size_t size() const { return specs.size(); }
};

// extract -> stft -> log per entry; each audio file is read once.
SpectrogramSet prepare_spectrograms(const DatasetManifest& manifest, const StftConfig& stft = {},
                                    int workers = 1);
void normalize_in_place(SpectrogramSet& set, const NormStats& stats);

NormStats manifest_norm_stats(const DatasetManifest& manifest, const StftConfig& stft = {},
                              int workers = 1);

TrainResult train_word_classifier(const DatasetManifest& train, const DatasetManifest& val,
                                  const ModelConfig& model_config, const TrainConfig& config,
                                  const StepCallback& on_step = {});

enum class FineTuneMode { kFresh, kFrozen, kFinetune };
FineTuneMode parse_fine_tune_mode(const std::string& s);
const char* fine_tune_mode_name(FineTuneMode mode);

// Swaps the head for the new class count and trains per `mode`. The base
// checkpoint's normalisation statistics are reused.
TrainResult fine_tune(const Checkpoint& base, FineTuneMode mode, const DatasetManifest& train,
                      const DatasetManifest& val, const TrainConfig& config,
                      const StepCallback& on_step = {});

struct EvalResult {
  double accuracy = 0.0;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::size_t total = 0;
};

// Single-window, non-augmented evaluation with centred placement.
EvalResult evaluate(const SpeechVGG& model, const NormStats& stats, const DatasetManifest& manifest,
                    int workers = 1);
// Same on already normalised spectrograms.
EvalResult evaluate(const SpeechVGG& model, const SpectrogramSet& normalized);

// Names of convolution parameters whose bytes differ between two models.
std::vector<std::string> changed_conv_params(const SpeechVGG& a, const SpeechVGG& b);

}  // namespace svgg

#endif  // SVGG_TRAIN_H_

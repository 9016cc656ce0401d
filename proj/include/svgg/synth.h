// include/svgg/synth.h

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

#ifndef SVGG_SYNTH_H_
#define SVGG_SYNTH_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "svgg/data.h"
#include "svgg/random.h"
#include "svgg/wav.h"

namespace svgg {

// Deterministic toy corpora standing in for real speech data.

inline constexpr int kNumWordTemplates = 10;
const std::vector<std::string>& synth_word_names();

// One utterance of toy word `word` (0..9): a distinct chirp/harmonic
// template with random duration, pitch jitter and additive noise.
AudioBuffer synth_word(int word, double duration_s, Rng& rng);

// Harmonic "speaker" rendering of one of five shared pitch contours; each
// speaker has its own pitch level, spectral tilt and formant.
AudioBuffer synth_speaker_word(int speaker, int word, double duration_s, Rng& rng);

enum class SceneClass { kSpeech = 0, kMusic = 1, kNoise = 2 };
AudioBuffer synth_scene(SceneClass cls, double duration_s, Rng& rng);

struct WordCorpusOptions {
  int num_classes = 10;
  int train_per_class = 50;
  int val_per_class = 10;
  double min_duration_s = 0.5;
  double max_duration_s = 1.0;
  std::uint64_t seed = 1;
};

struct SpeakerCorpusOptions {
  int num_speakers = 10;
  int train_per_speaker = 30;
  int val_per_speaker = 10;
  double min_duration_s = 0.5;
  double max_duration_s = 1.0;
  std::uint64_t seed = 2;
};

struct SceneCorpusOptions {
  int train_per_class = 30;
  int test_per_class = 10;
  double min_duration_s = 1.1;
  double max_duration_s = 2.5;
  std::uint64_t seed = 3;
};

struct CorpusFiles {
  DatasetManifest train;
  DatasetManifest val;
  std::string train_manifest;
  std::string val_manifest;
  std::string alignments;  // word corpus only
};

struct LabeledRecording {
  std::string id;
  std::string path;
  int label = 0;
};

struct SceneCorpus {
  std::vector<LabeledRecording> train;
  std::vector<LabeledRecording> test;
  std::vector<std::string> class_names{"speech", "music", "noise"};
};

// Writes utterance wavs (word plus surrounding low-level noise), an
// alignment CSV and train/val manifests built through build_dictionary.
CorpusFiles generate_word_corpus(const std::string& dir, const WordCorpusOptions& opts = {});
CorpusFiles generate_speaker_corpus(const std::string& dir, const SpeakerCorpusOptions& opts = {});
// Writes wavs, `<split>_list.txt` (one path per line) and `<split>_labels.csv`.
SceneCorpus generate_scene_corpus(const std::string& dir, const SceneCorpusOptions& opts = {});

}  // namespace svgg

#endif  // SVGG_SYNTH_H_

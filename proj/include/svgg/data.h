// include/svgg/data.h

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

#ifndef SVGG_DATA_H_
#define SVGG_DATA_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "svgg/random.h"
#include "svgg/stft.h"
#include "svgg/wav.h"

namespace svgg {

inline constexpr int kCanvasSize = 128;

struct WordAlignment {
  std::string utterance_id;
  std::string word;  // lowercase
  std::size_t start_sample = 0;
  std::size_t end_sample = 0;
};

// CSV with header `utterance_id,word,start_sample,end_sample`.
std::vector<WordAlignment> parse_alignments(const std::string& path);
std::vector<WordAlignment> parse_alignments_text(const std::string& text,
                                                 const std::string& source = "<text>");

class Dictionary {
 public:
  Dictionary() = default;
  Dictionary(std::vector<std::string> words, int min_word_len);

  int size() const { return static_cast<int>(words_.size()); }
  int min_word_len() const { return min_word_len_; }
  const std::vector<std::string>& words() const { return words_; }
  const std::map<std::string, int>& word_to_class() const { return word_to_class_; }
  // -1 when absent.
  int class_of(const std::string& word) const;
  // FNV-1a over the class-ordered word list.
  std::uint64_t hash() const;

 private:
  std::vector<std::string> words_;
  std::map<std::string, int> word_to_class_;
  int min_word_len_ = 4;
};

// Top `size` words of length >= min_word_len by descending frequency, ties
// broken lexicographically; class index is the rank.
Dictionary build_dictionary(std::span<const WordAlignment> alignments, int size,
                            int min_word_len = 4);

struct ManifestEntry {
  std::string audio;  // path to a wav file
  WordAlignment alignment;
  int label = 0;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::uint64_t seed = 0;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  int num_classes() const;  // max label + 1
};

// JSON lines {audio, utterance_id, word, start_sample, end_sample, class}.
// Relative audio paths are resolved against the manifest's directory.
DatasetManifest load_manifest(const std::string& path, std::uint64_t seed = 0);
void save_manifest(const DatasetManifest& manifest, const std::string& path);

// Entries for every alignment whose word is in the dictionary. `audio_for`
// maps an utterance id to its wav path.
DatasetManifest make_manifest(std::span<const WordAlignment> alignments,
                              const Dictionary& dict,
                              const std::map<std::string, std::string>& audio_for,
                              std::uint64_t seed = 0);

// Checks that every word appearing in both manifests maps to one class.
void check_same_dictionary(const DatasetManifest& a, const DatasetManifest& b);
std::uint64_t manifest_dictionary_hash(const DatasetManifest& m);

AudioBuffer extract_segment(const AudioBuffer& audio, const WordAlignment& a);

using Canvas = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct PadOffset {
  int freq = 0;
  int time = 0;
};

struct PaddedExample {
  Canvas canvas;  // kCanvasSize x kCanvasSize
  int label = -1;
  PadOffset pad_offset;
  int crop_start = 0;     // first source frame used
  int placed_frames = 0;  // frames copied onto the canvas
};

// Copies frames [crop_start, crop_start + placed) of `spec` to canvas column
// `time_offset`; everything else stays zero.
PaddedExample place_on_canvas(const LogMagSpectrogram& spec, int time_offset, int crop_start);

// Random time offset (or random 128-frame crop for long inputs).
PaddedExample pad_to_canvas(const LogMagSpectrogram& spec, Rng& rng);

// Deterministic placement used at inference: centred offset or centred crop.
PaddedExample center_on_canvas(const LogMagSpectrogram& spec);

using Batch = std::vector<std::size_t>;

// Partition of [0, n); order is a shuffle keyed on (seed, epoch).
std::vector<Batch> make_index_batches(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                      std::uint64_t epoch);

// Partition of manifest indices; order is a shuffle keyed on (seed, epoch).
std::vector<Batch> make_batches(const DatasetManifest& manifest, std::size_t batch_size,
                                std::uint64_t epoch);

}  // namespace svgg

#endif  // SVGG_DATA_H_

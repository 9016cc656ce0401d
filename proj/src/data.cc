// src/data.cc

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

#include "svgg/data.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "svgg/error.h"

namespace svgg {
namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_index(const std::string& s, std::size_t& out) {
  if (s.empty()) return false;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

std::string lowercase(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::vector<WordAlignment> parse_alignments_text(const std::string& text,
                                                 const std::string& source) {
  std::vector<WordAlignment> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (lineno == 1 && t.rfind("utterance_id,", 0) == 0) continue;
    std::vector<std::string> fields;
    std::stringstream ss(t);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(trim(f));
    auto fail = [&](const std::string& why) {
      return DataError(source + ":" + std::to_string(lineno) + ": " + why);
    };
    if (fields.size() != 4) throw fail("expected 4 comma-separated fields");
    WordAlignment a;
    a.utterance_id = fields[0];
    a.word = lowercase(fields[1]);
    if (a.utterance_id.empty()) throw fail("empty utterance id");
    if (a.word.empty()) throw fail("empty word");
    if (!parse_index(fields[2], a.start_sample) || !parse_index(fields[3], a.end_sample))
      throw fail("sample indices must be non-negative integers");
    if (a.start_sample >= a.end_sample) throw fail("start_sample must be < end_sample");
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<WordAlignment> parse_alignments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open alignment file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_alignments_text(buf.str(), path);
}

Dictionary::Dictionary(std::vector<std::string> words, int min_word_len)
    : words_(std::move(words)), min_word_len_(min_word_len) {
  for (int i = 0; i < static_cast<int>(words_.size()); ++i) {
    if (!word_to_class_.emplace(words_[i], i).second)
      throw DataError("dictionary: duplicate word '" + words_[i] + "'");
  }
}

int Dictionary::class_of(const std::string& word) const {
  auto it = word_to_class_.find(word);
  return it == word_to_class_.end() ? -1 : it->second;
}

namespace {

std::uint64_t fnv1a_words(const std::vector<std::string>& words) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (const auto& w : words) {
    for (unsigned char c : w) feed(c);
    feed('\n');
  }
  return h;
}

}  // namespace

std::uint64_t Dictionary::hash() const { return fnv1a_words(words_); }

Dictionary build_dictionary(std::span<const WordAlignment> alignments, int size,
                            int min_word_len) {
  if (size < 1) throw UsageError("dictionary size must be >= 1");
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& a : alignments)
    if (static_cast<int>(a.word.size()) >= min_word_len) ++counts[a.word];
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  if (static_cast<int>(ranked.size()) < size)
    throw DataError("dictionary: only " + std::to_string(ranked.size()) +
                    " qualifying words, " + std::to_string(size) + " requested");
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> words;
  words.reserve(size);
  for (int i = 0; i < size; ++i) words.push_back(ranked[i].first);
  return Dictionary(std::move(words), min_word_len);
}

int DatasetManifest::num_classes() const {
  int k = 0;
  for (const auto& e : entries) k = std::max(k, e.label + 1);
  return k;
}

DatasetManifest load_manifest(const std::string& path, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path);
  const auto base = std::filesystem::path(path).parent_path();
  DatasetManifest m;
  m.seed = seed;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      ManifestEntry e;
      std::filesystem::path audio = j.at("audio").get<std::string>();
      e.audio = audio.is_absolute() || base.empty() ? audio.string() : (base / audio).string();
      e.alignment.utterance_id = j.at("utterance_id").get<std::string>();
      e.alignment.word = j.at("word").get<std::string>();
      e.alignment.start_sample = j.at("start_sample").get<std::size_t>();
      e.alignment.end_sample = j.at("end_sample").get<std::size_t>();
      e.label = j.at("class").get<int>();
      if (e.alignment.start_sample >= e.alignment.end_sample)
        throw DataError("start_sample must be < end_sample");
      if (e.label < 0) throw DataError("negative class index");
      m.entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + ex.what());
    } catch (const DataError& ex) {
      throw DataError(path + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return m;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest: " + path);
  // Relative audio paths are rewritten against the manifest's directory,
  // which is how load_manifest resolves them.
  const auto base = std::filesystem::absolute(path).parent_path();
  for (const auto& e : manifest.entries) {
    std::filesystem::path audio = e.audio;
    if (audio.is_relative()) audio = std::filesystem::absolute(audio).lexically_relative(base);
    nlohmann::json j = {{"audio", audio.generic_string()},
                        {"utterance_id", e.alignment.utterance_id},
                        {"word", e.alignment.word},
                        {"start_sample", e.alignment.start_sample},
                        {"end_sample", e.alignment.end_sample},
                        {"class", e.label}};
    out << j.dump() << '\n';
  }
}

DatasetManifest make_manifest(std::span<const WordAlignment> alignments,
                              const Dictionary& dict,
                              const std::map<std::string, std::string>& audio_for,
                              std::uint64_t seed) {
  DatasetManifest m;
  m.seed = seed;
  for (const auto& a : alignments) {
    const int cls = dict.class_of(a.word);
    if (cls < 0) continue;
    auto it = audio_for.find(a.utterance_id);
    if (it == audio_for.end())
      throw DataError("no audio for utterance '" + a.utterance_id + "'");
    m.entries.push_back({it->second, a, cls});
  }
  return m;
}

void check_same_dictionary(const DatasetManifest& a, const DatasetManifest& b) {
  std::map<std::string, int> seen;
  for (const auto* m : {&a, &b}) {
    for (const auto& e : m->entries) {
      auto [it, inserted] = seen.emplace(e.alignment.word, e.label);
      if (!inserted && it->second != e.label)
        throw DataError("dictionary mismatch: word '" + e.alignment.word + "' has classes " +
                        std::to_string(it->second) + " and " + std::to_string(e.label));
    }
  }
}

std::uint64_t manifest_dictionary_hash(const DatasetManifest& m) {
  std::map<int, std::string> by_class;
  for (const auto& e : m.entries) by_class.emplace(e.label, e.alignment.word);
  // Equals Dictionary::hash() when every class occurs; absent classes hash as "".
  std::vector<std::string> words(by_class.empty() ? 0 : by_class.rbegin()->first + 1);
  for (auto& [cls, w] : by_class) words[cls] = w;
  return fnv1a_words(words);
}

AudioBuffer extract_segment(const AudioBuffer& audio, const WordAlignment& a) {
  if (a.start_sample >= a.end_sample || a.end_sample > audio.samples.size())
    throw DataError("alignment [" + std::to_string(a.start_sample) + ", " +
                    std::to_string(a.end_sample) + ") out of range for " +
                    std::to_string(audio.samples.size()) + " samples (" + a.utterance_id + ")");
  AudioBuffer out;
  out.sample_rate = audio.sample_rate;
  out.samples.assign(audio.samples.begin() + a.start_sample,
                     audio.samples.begin() + a.end_sample);
  return out;
}

PaddedExample place_on_canvas(const LogMagSpectrogram& spec, int time_offset, int crop_start) {
  if (spec.num_bins() != kCanvasSize)
    throw DataError("pad_to_canvas: expected " + std::to_string(kCanvasSize) + " bins, got " +
                    std::to_string(spec.num_bins()));
  if (!spec.normalized) throw DataError("pad_to_canvas: spectrogram is not normalized");
  const int frames = spec.num_frames();
  const int placed = std::min(frames, kCanvasSize);
  if (time_offset < 0 || time_offset + placed > kCanvasSize || crop_start < 0 ||
      crop_start + placed > frames)
    throw UsageError("place_on_canvas: placement out of range");
  PaddedExample ex;
  ex.canvas = Canvas::Zero(kCanvasSize, kCanvasSize);
  ex.canvas.middleCols(time_offset, placed) =
      spec.values.middleCols(crop_start, placed).cast<float>();
  ex.pad_offset = {0, time_offset};
  ex.crop_start = crop_start;
  ex.placed_frames = placed;
  return ex;
}

PaddedExample pad_to_canvas(const LogMagSpectrogram& spec, Rng& rng) {
  const int frames = spec.num_frames();
  if (frames <= kCanvasSize) {
    std::uniform_int_distribution<int> off(0, kCanvasSize - frames);
    return place_on_canvas(spec, off(rng), 0);
  }
  std::uniform_int_distribution<int> crop(0, frames - kCanvasSize);
  return place_on_canvas(spec, 0, crop(rng));
}

PaddedExample center_on_canvas(const LogMagSpectrogram& spec) {
  const int frames = spec.num_frames();
  if (frames <= kCanvasSize) return place_on_canvas(spec, (kCanvasSize - frames) / 2, 0);
  return place_on_canvas(spec, 0, (frames - kCanvasSize) / 2);
}

std::vector<Batch> make_index_batches(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                      std::uint64_t epoch) {
  if (batch_size < 1) throw UsageError("batch_size must be >= 1");
  if (n == 0) throw DataError("empty manifest");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(seed, {tag(SeedStream::kShuffle), epoch});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Batch> batches;
  for (std::size_t i = 0; i < n; i += batch_size) {
    const std::size_t end = std::min(n, i + batch_size);
    batches.emplace_back(order.begin() + i, order.begin() + end);
  }
  return batches;
}

std::vector<Batch> make_batches(const DatasetManifest& manifest, std::size_t batch_size,
                                std::uint64_t epoch) {
  return make_index_batches(manifest.size(), batch_size, manifest.seed, epoch);
}

}  // namespace svgg

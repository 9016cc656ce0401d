// src/synth.cc

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

#include "svgg/synth.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

#include "svgg/error.h"

namespace svgg {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMaxPartialHz = 7600.0;

using Contour = std::function<double(double)>;  // u in [0, 1] -> Hz

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t samples_for(double seconds) {
  return static_cast<std::size_t>(std::lround(seconds * kSampleRate));
}

// Smooth attack and release over `edge` of the duration.
double envelope(double u, double edge = 0.12) {
  if (u < edge) return 0.5 - 0.5 * std::cos(std::numbers::pi * u / edge);
  if (u > 1.0 - edge) return 0.5 - 0.5 * std::cos(std::numbers::pi * (1.0 - u) / edge);
  return 1.0;
}

// Sum of harmonics k*f0(u) with amplitude k^-tilt, optionally shaped by a
// Gaussian formant bump.
void add_harmonics(std::vector<double>& out, const Contour& f0, int harmonics, double tilt,
                   double amp, double formant_hz = 0.0, double formant_width = 0.0) {
  const std::size_t n = out.size();
  std::vector<double> phase(harmonics, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = n > 1 ? double(i) / double(n - 1) : 0.0;
    const double f = f0(u);
    double s = 0.0;
    for (int k = 1; k <= harmonics; ++k) {
      const double fk = k * f;
      if (fk >= kMaxPartialHz) break;
      phase[k - 1] += kTwoPi * fk / kSampleRate;
      double a = std::pow(double(k), -tilt);
      if (formant_width > 0.0) {
        const double d = (fk - formant_hz) / formant_width;
        a *= 0.25 + std::exp(-0.5 * d * d);
      }
      s += a * std::sin(phase[k - 1]);
    }
    out[i] += amp * envelope(u) * s;
  }
}

void add_noise(std::vector<double>& out, double stddev, Rng& rng) {
  std::normal_distribution<double> g(0.0, stddev);
  for (auto& v : out) v += g(rng);
}

double rms(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return x.empty() ? 0.0 : std::sqrt(s / double(x.size()));
}

// Scales to the given peak and adds white noise at `snr_db` below the signal.
AudioBuffer finish(std::vector<double> x, double peak, double snr_db, Rng& rng) {
  double mx = 0.0;
  for (double v : x) mx = std::max(mx, std::abs(v));
  if (mx > 0.0)
    for (auto& v : x) v *= peak / mx;
  add_noise(x, rms(x) * std::pow(10.0, -snr_db / 20.0), rng);
  AudioBuffer a;
  a.samples.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    a.samples[i] = static_cast<float>(std::clamp(x[i], -0.99, 0.99));
  return a;
}

Contour linear(double a, double b) {
  return [a, b](double u) { return a + (b - a) * u; };
}

// Band-limited noise: white noise through a two-pole resonator.
void add_band_noise(std::vector<double>& out, double center_hz, double r, double amp, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  const double w = kTwoPi * center_hz / kSampleRate;
  const double a1 = 2.0 * r * std::cos(w), a2 = -r * r;
  double y1 = 0.0, y2 = 0.0;
  std::vector<double> tmp(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double y = (1.0 - r) * g(rng) + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    tmp[i] = y;
  }
  const double scale = rms(tmp) > 0 ? amp / rms(tmp) : 0.0;
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i)
    out[i] += scale * tmp[i] * envelope(n > 1 ? double(i) / double(n - 1) : 0.0);
}

std::string zero_pad(int v, int width) {
  std::ostringstream os;
  os << std::setw(width) << std::setfill('0') << v;
  return os.str();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir + ": " + ec.message());
}

// Places `word` inside low-level noise; returns the utterance and the word span.
std::pair<AudioBuffer, std::pair<std::size_t, std::size_t>> embed_in_silence(
    const AudioBuffer& word, Rng& rng) {
  const std::size_t lead = samples_for(uniform(rng, 0.05, 0.2));
  const std::size_t tail = samples_for(uniform(rng, 0.05, 0.2));
  AudioBuffer utt;
  utt.samples.assign(lead + word.size() + tail, 0.0f);
  std::normal_distribution<double> g(0.0, 0.002);
  for (auto& v : utt.samples) v = static_cast<float>(g(rng));
  for (std::size_t i = 0; i < word.size(); ++i)
    utt.samples[lead + i] = std::clamp(utt.samples[lead + i] + word.samples[i], -0.99f, 0.99f);
  return {utt, {lead, lead + word.size()}};
}

}  // namespace

const std::vector<std::string>& synth_word_names() {
  static const std::vector<std::string> names{"alpha", "bravo", "charlie", "delta", "echo",
                                              "foxtrot", "golf", "hotel", "india", "juliet"};
  return names;
}

AudioBuffer synth_word(int word, double duration_s, Rng& rng) {
  if (word < 0 || word >= kNumWordTemplates) throw UsageError("synth_word: unknown word");
  const double j = uniform(rng, 0.94, 1.06);
  std::vector<double> x(samples_for(duration_s), 0.0);
  switch (word) {
    case 0: add_harmonics(x, linear(200 * j, 400 * j), 6, 1.0, 1.0); break;
    case 1: add_harmonics(x, linear(400 * j, 200 * j), 6, 1.0, 1.0); break;
    case 2:
      add_harmonics(x, [j](double u) { return 300 * j * (1.0 + 0.03 * std::sin(kTwoPi * 6.0 * u)); },
                    8, 1.0, 1.0);
      break;
    case 3:
      add_harmonics(x, [j](double u) { return (u < 0.5 ? 250.0 : 500.0) * j; }, 4, 1.0, 1.0);
      break;
    case 4: add_harmonics(x, linear(1000 * j, 3000 * j), 1, 0.0, 1.0); break;
    case 5: add_harmonics(x, linear(3000 * j, 1000 * j), 1, 0.0, 1.0); break;
    case 6:
      add_band_noise(x, 2500 * j, 0.97, 0.5, rng);
      add_harmonics(x, linear(150 * j, 150 * j), 2, 1.0, 0.6);
      break;
    case 7: add_harmonics(x, linear(150 * j, 150 * j), 15, 0.5, 1.0); break;
    case 8: {
      std::vector<double> y(x.size(), 0.0);
      add_harmonics(y, linear(700 * j, 700 * j), 1, 0.0, 1.0);
      add_harmonics(y, linear(1800 * j, 1800 * j), 1, 0.0, 1.0);
      for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = y[i] * (0.6 + 0.4 * std::sin(kTwoPi * 8.0 * double(i) / kSampleRate));
      break;
    }
    case 9:
      add_harmonics(x, [j](double u) { return j * (200.0 + 250.0 * std::sin(std::numbers::pi * u)); },
                    5, 1.0, 1.0);
      break;
  }
  return finish(std::move(x), uniform(rng, 0.3, 0.6), uniform(rng, 15.0, 25.0), rng);
}

AudioBuffer synth_speaker_word(int speaker, int word, double duration_s, Rng& rng) {
  const double base = 110.0 * std::pow(1.1, speaker) * uniform(rng, 0.97, 1.03);
  const double tilt = 0.6 + 0.15 * ((speaker * 3) % 10);
  const double formant = 800.0 + 150.0 * ((speaker * 7) % 10);
  Contour contour;
  switch (word % 5) {
    case 0: contour = [base](double u) { return base * (1.0 + 0.5 * u); }; break;
    case 1: contour = [base](double u) { return base * (1.5 - 0.5 * u); }; break;
    case 2: contour = [base](double) { return base * 1.2; }; break;
    case 3: contour = [base](double u) { return base * (1.0 + 0.4 * std::sin(std::numbers::pi * u)); }; break;
    default: contour = [base](double u) { return base * (1.4 - 0.4 * std::sin(std::numbers::pi * u)); }; break;
  }
  std::vector<double> x(samples_for(duration_s), 0.0);
  add_harmonics(x, contour, 40, tilt, 1.0, formant, 300.0);
  return finish(std::move(x), uniform(rng, 0.3, 0.6), uniform(rng, 18.0, 25.0), rng);
}

AudioBuffer synth_scene(SceneClass cls, double duration_s, Rng& rng) {
  const std::size_t n = samples_for(duration_s);
  std::vector<double> x(n, 0.0);
  switch (cls) {
    case SceneClass::kSpeech: {
      std::size_t pos = 0;
      while (pos < n) {
        const std::size_t len = std::min(n - pos, samples_for(uniform(rng, 0.12, 0.3)));
        std::vector<double> syl(len, 0.0);
        const double f0 = uniform(rng, 100.0, 250.0), df = uniform(rng, -0.3, 0.3);
        add_harmonics(syl, [f0, df](double u) { return f0 * (1.0 + df * u); }, 30, 1.0, 1.0,
                      uniform(rng, 500.0, 2500.0), 400.0);
        for (std::size_t i = 0; i < len; ++i) x[pos + i] += syl[i];
        pos += len + samples_for(uniform(rng, 0.03, 0.1));
      }
      break;
    }
    case SceneClass::kMusic: {
      static const int scale[] = {0, 2, 4, 5, 7, 9, 11, 12};
      std::size_t pos = 0;
      while (pos < n) {
        const std::size_t len = std::min(n - pos, samples_for(uniform(rng, 0.2, 0.5)));
        std::vector<double> note(len, 0.0);
        const double root = 220.0 * std::pow(2.0, uniform(rng, 0.0, 1.0));
        const int voices = 2 + static_cast<int>(rng() % 2);
        for (int v = 0; v < voices; ++v) {
          const double f = root * std::pow(2.0, scale[rng() % 8] / 12.0);
          add_harmonics(note, [f](double) { return f; }, 3, 1.5, 1.0);
        }
        for (std::size_t i = 0; i < len; ++i) x[pos + i] += note[i];
        pos += len;
      }
      break;
    }
    case SceneClass::kNoise: {
      std::normal_distribution<double> g(0.0, 1.0);
      const double a = uniform(rng, 0.0, 0.95);
      const bool highpass = rng() % 2 == 0;
      double y = 0.0, prev = 0.0;
      const double rate = uniform(rng, 0.3, 2.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double w = g(rng);
        y = highpass ? a * y + (w - prev) : a * y + (1.0 - a) * w;
        prev = w;
        x[i] = y * (0.7 + 0.3 * std::sin(kTwoPi * rate * double(i) / kSampleRate));
      }
      break;
    }
  }
  return finish(std::move(x), uniform(rng, 0.3, 0.6), 30.0, rng);
}

CorpusFiles generate_word_corpus(const std::string& dir, const WordCorpusOptions& opts) {
  if (opts.num_classes < 2 || opts.num_classes > kNumWordTemplates)
    throw UsageError("word corpus: num_classes must be in [2, 10]");
  ensure_dir(dir);
  const auto& names = synth_word_names();
  std::vector<WordAlignment> train_align, val_align;
  std::map<std::string, std::string> audio_for;
  std::ofstream csv(dir + "/alignments.csv");
  csv << "utterance_id,word,start_sample,end_sample\n";
  int utt = 0;
  for (int split = 0; split < 2; ++split) {
    const int per_class = split == 0 ? opts.train_per_class : opts.val_per_class;
    for (int i = 0; i < per_class; ++i) {
      for (int c = 0; c < opts.num_classes; ++c, ++utt) {
        Rng rng = make_rng(opts.seed, {tag(SeedStream::kSynth), std::uint64_t(split),
                                       std::uint64_t(c), std::uint64_t(i)});
        const double dur = uniform(rng, opts.min_duration_s, opts.max_duration_s);
        auto [audio, span] = embed_in_silence(synth_word(c, dur, rng), rng);
        const std::string id = (split == 0 ? "train" : "val") + zero_pad(utt, 5);
        const std::string path = dir + "/" + id + ".wav";
        write_wav(path, audio);
        audio_for[id] = path;
        WordAlignment a{id, names[c], span.first, span.second};
        csv << a.utterance_id << ',' << a.word << ',' << a.start_sample << ',' << a.end_sample
            << '\n';
        (split == 0 ? train_align : val_align).push_back(a);
      }
    }
  }
  csv.close();

  CorpusFiles files;
  files.alignments = dir + "/alignments.csv";
  const Dictionary dict = build_dictionary(train_align, opts.num_classes, 4);
  files.train = make_manifest(train_align, dict, audio_for, opts.seed);
  files.val = make_manifest(val_align, dict, audio_for, opts.seed);
  files.train_manifest = dir + "/train.jsonl";
  files.val_manifest = dir + "/val.jsonl";
  save_manifest(files.train, files.train_manifest);
  save_manifest(files.val, files.val_manifest);
  return files;
}

CorpusFiles generate_speaker_corpus(const std::string& dir, const SpeakerCorpusOptions& opts) {
  if (opts.num_speakers < 2) throw UsageError("speaker corpus: need at least two speakers");
  ensure_dir(dir);
  CorpusFiles files;
  int utt = 0;
  for (int split = 0; split < 2; ++split) {
    const int per = split == 0 ? opts.train_per_speaker : opts.val_per_speaker;
    DatasetManifest& m = split == 0 ? files.train : files.val;
    m.seed = opts.seed;
    for (int i = 0; i < per; ++i) {
      for (int s = 0; s < opts.num_speakers; ++s, ++utt) {
        Rng rng = make_rng(opts.seed, {tag(SeedStream::kSynth), 100u + split, std::uint64_t(s),
                                       std::uint64_t(i)});
        const double dur = uniform(rng, opts.min_duration_s, opts.max_duration_s);
        auto [audio, span] = embed_in_silence(synth_speaker_word(s, i % 5, dur, rng), rng);
        const std::string id = (split == 0 ? "spk_train" : "spk_val") + zero_pad(utt, 5);
        const std::string path = dir + "/" + id + ".wav";
        write_wav(path, audio);
        m.entries.push_back({path, {id, "speaker" + zero_pad(s, 2), span.first, span.second}, s});
      }
    }
  }
  files.train_manifest = dir + "/train.jsonl";
  files.val_manifest = dir + "/val.jsonl";
  save_manifest(files.train, files.train_manifest);
  save_manifest(files.val, files.val_manifest);
  return files;
}

SceneCorpus generate_scene_corpus(const std::string& dir, const SceneCorpusOptions& opts) {
  ensure_dir(dir);
  SceneCorpus corpus;
  for (int split = 0; split < 2; ++split) {
    const int per = split == 0 ? opts.train_per_class : opts.test_per_class;
    const std::string name = split == 0 ? "train" : "test";
    auto& out = split == 0 ? corpus.train : corpus.test;
    std::ofstream list(dir + "/" + name + "_list.txt");
    std::ofstream labels(dir + "/" + name + "_labels.csv");
    labels << "recording_id,label\n";
    for (int i = 0; i < per; ++i) {
      for (int c = 0; c < 3; ++c) {
        Rng rng = make_rng(opts.seed, {tag(SeedStream::kSynth), 200u + split, std::uint64_t(c),
                                       std::uint64_t(i)});
        const double dur = uniform(rng, opts.min_duration_s, opts.max_duration_s);
        const AudioBuffer audio = synth_scene(static_cast<SceneClass>(c), dur, rng);
        const std::string id = name + "_" + corpus.class_names[c] + zero_pad(i, 4);
        const std::string path = dir + "/" + id + ".wav";
        write_wav(path, audio);
        out.push_back({id, path, c});
        list << id << ".wav\n";
        labels << id << ',' << corpus.class_names[c] << '\n';
      }
    }
  }
  return corpus;
}

}  // namespace svgg

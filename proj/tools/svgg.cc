// tools/svgg.cc

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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "svgg/checkpoint.h"
#include "svgg/config.h"
#include "svgg/data.h"
#include "svgg/dream.h"
#include "svgg/error.h"
#include "svgg/features.h"
#include "svgg/logreg.h"
#include "svgg/random.h"
#include "svgg/synth.h"
#include "svgg/train.h"
#include "svgg/wav.h"

namespace fs = std::filesystem;
using namespace svgg;

namespace {

struct Common {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 1;
  std::string out;
};

void add_common(CLI::App* app, Common& c, bool with_out = true) {
  app->add_option("--config", c.config_path, "JSON config file")->check(CLI::ExistingFile);
  app->add_option_function<std::uint64_t>(
      "--seed", [&c](std::uint64_t s) { c.seed = s, c.seed_set = true; }, "root seed");
  app->add_option("--workers", c.workers, "preprocessing threads")->check(CLI::PositiveNumber);
  if (with_out) app->add_option("--out", c.out, "output directory")->required();
}

CliConfig resolve(const Common& c) {
  CliConfig cfg = c.config_path.empty() ? CliConfig{} : CliConfig::load(c.config_path);
  if (c.seed_set) cfg.set_seed(c.seed);
  cfg.train.workers = c.workers;
  return cfg;
}

// Manifest paths in a config file are relative to that file.
std::string config_relative(const Common& c, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute() || c.config_path.empty()) return p;
  return (fs::path(c.config_path).parent_path() / p).string();
}

std::string out_file(const Common& c, const std::string& name) {
  fs::create_directories(c.out);
  return (fs::path(c.out) / name).string();
}

std::vector<std::string> read_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open list " + path);
  std::vector<std::string> out;
  const auto base = fs::path(path).parent_path();
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    fs::path p = line;
    out.push_back(p.is_absolute() || base.empty() ? p.string() : (base / p).string());
  }
  return out;
}

std::string recording_id(const std::string& path) { return fs::path(path).stem().string(); }

// Window of the shorter file in a dfl pair; silence once less than one frame remains.
Canvas padded_window(const AudioBuffer& audio, std::size_t start, const NormStats& stats) {
  if (start + static_cast<std::size_t>(StftConfig{}.window_len) > audio.size())
    return Canvas::Zero(kCanvasSize, kCanvasSize);
  return window_canvas(audio, start, stats);
}

// recording_id,label ; returns rows in file order.
std::vector<std::pair<std::string, std::string>> read_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open labels " + path);
  std::vector<std::pair<std::string, std::string>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected recording_id,label");
    std::string id = line.substr(0, comma), label = line.substr(comma + 1);
    if (lineno == 1 && id == "recording_id") continue;
    rows.emplace_back(std::move(id), std::move(label));
  }
  if (rows.empty()) throw DataError("labels file " + path + " has no rows");
  return rows;
}

struct LabeledFeatures {
  std::vector<std::vector<double>> x;
  std::vector<std::string> labels;
};

LabeledFeatures join(const std::string& tsv, const std::string& labels_csv) {
  std::map<std::string, const Embedding*> by_id;
  const auto embs = read_embeddings_tsv(tsv);
  for (const auto& e : embs) by_id[e.source] = &e;
  LabeledFeatures out;
  for (const auto& [id, label] : read_labels(labels_csv)) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw DataError("recording '" + id + "' is missing from " + tsv);
    out.x.emplace_back(it->second->values.begin(), it->second->values.end());
    out.labels.push_back(label);
  }
  return out;
}

void print_confusion(const std::vector<std::vector<std::size_t>>& m,
                     const std::vector<std::string>& names) {
  std::cout << "confusion (rows = true, cols = predicted)\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::cout << (i < names.size() ? names[i] : std::to_string(i));
    for (auto v : m[i]) std::cout << '\t' << v;
    std::cout << '\n';
  }
}

void write_report(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << '\n';
}

void print_progress(const StepRecord& r) {
  if (std::isnan(r.val_acc)) return;
  std::fprintf(stderr, "epoch %d step %lld loss %.4f train_acc %.4f val_acc %.4f (%.1fs)\n",
               r.epoch, static_cast<long long>(r.step), r.loss, r.train_acc, r.val_acc,
               r.seconds);
}

int run(int argc, char** argv) {
  CLI::App app{"speechvgg: word-classifier feature extractor toolkit"};
  app.require_subcommand(1);

  Common c;
  std::string manifest, train_manifest, val_manifest, checkpoint, mode, list, wav_a, wav_b,
      embeddings, labels, model_path, layer, alignments_train, alignments_val, audio_dir, kind;

  auto* stats = app.add_subcommand("stats", "compute normalization statistics of a manifest");
  add_common(stats, c);
  stats->add_option("--manifest", manifest)->required();

  auto* train = app.add_subcommand("train", "pre-train the word classifier");
  add_common(train, c);
  train->add_option("--train", train_manifest, "train manifest (overrides dataset.train_manifest)");
  train->add_option("--val", val_manifest, "validation manifest");

  auto* finetune = app.add_subcommand("finetune", "adapt a checkpoint to a new task");
  add_common(finetune, c);
  finetune->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  finetune->add_option("--mode", mode, "fresh, frozen or finetune")->required();
  finetune->add_option("--train", train_manifest);
  finetune->add_option("--val", val_manifest);

  auto* extract = app.add_subcommand("extract", "write recording embeddings as TSV");
  add_common(extract, c);
  extract->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  extract->add_option("--list", list, "file with one wav path per line")->required();

  auto* dfl = app.add_subcommand("dfl", "print the deep feature loss between two recordings");
  add_common(dfl, c, false);
  dfl->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  dfl->add_option("wav_a", wav_a)->required();
  dfl->add_option("wav_b", wav_b)->required();

  auto* classify = app.add_subcommand("classify", "logistic regression over embeddings");
  classify->require_subcommand(1);
  auto* fit = classify->add_subcommand("fit", "train a classifier");
  add_common(fit, c);
  fit->add_option("--embeddings", embeddings)->required();
  fit->add_option("--labels", labels)->required();
  auto* eval = classify->add_subcommand("eval", "evaluate a classifier");
  add_common(eval, c, false);
  eval->add_option("--embeddings", embeddings)->required();
  eval->add_option("--labels", labels)->required();
  eval->add_option("--model", model_path)->required()->check(CLI::ExistingFile);

  auto* dream = app.add_subcommand("dream", "maximize the activation of a layer");
  add_common(dream, c);
  dream->add_option("--checkpoint", checkpoint)->required()->check(CLI::ExistingFile);
  dream->add_option("--layer", layer, "tap 1..5 or a layer name");

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  add_common(synth, c);
  synth->add_option("kind", kind, "words, speakers or scenes")
      ->required()
      ->check(CLI::IsMember({"words", "speakers", "scenes"}));

  auto* make = app.add_subcommand("manifest", "build manifests from alignment files");
  add_common(make, c);
  make->add_option("--train-alignments", alignments_train)->required()->check(CLI::ExistingFile);
  make->add_option("--val-alignments", alignments_val)->check(CLI::ExistingFile);
  make->add_option("--audio-dir", audio_dir, "directory holding <utterance_id>.wav")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  CliConfig cfg = resolve(c);

  if (stats->parsed()) {
    const DatasetManifest m = load_manifest(manifest);
    const NormStats s = manifest_norm_stats(m, cfg.stft, c.workers);
    s.save(out_file(c, "norm_stats.json"));
    cfg.dataset.train_manifest = manifest;
    cfg.write_resolved(c.out);
    return 0;
  }

  if (train->parsed() || finetune->parsed()) {
    if (train_manifest.empty()) train_manifest = config_relative(c, cfg.dataset.train_manifest);
    if (val_manifest.empty()) val_manifest = config_relative(c, cfg.dataset.val_manifest);
    if (train_manifest.empty()) throw UsageError("no train manifest (use --train or dataset.train_manifest)");
    cfg.dataset.train_manifest = train_manifest;
    cfg.dataset.val_manifest = val_manifest;
    const DatasetManifest tr = load_manifest(train_manifest, cfg.train.seed);
    const DatasetManifest va =
        val_manifest.empty() ? DatasetManifest{} : load_manifest(val_manifest, cfg.train.seed);
    TrainResult result;
    if (train->parsed()) {
      if (va.empty()) throw UsageError("train needs a validation manifest");
      ModelConfig mc = cfg.model;
      mc.num_classes = std::max(tr.num_classes(), va.num_classes());
      if (mc.num_classes < 2) throw DataError("train manifest has fewer than two classes");
      cfg.model = mc;
      cfg.write_resolved(c.out);
      result = train_word_classifier(tr, va, mc, cfg.train, print_progress);
    } else {
      const FineTuneMode m = parse_fine_tune_mode(mode);
      const Checkpoint base = load_checkpoint(checkpoint);
      cfg.model = base.model.config();
      cfg.write_resolved(c.out);
      result = fine_tune(base, m, tr, va, cfg.train, print_progress);
      if (m == FineTuneMode::kFrozen) {
        const auto changed = changed_conv_params(base.model, result.best.model);
        std::size_t conv_blobs = 0;
        for (std::size_t i = 0; i < result.best.model.params().size(); ++i)
          if (!result.best.model.is_head_param(i)) ++conv_blobs;
        write_report(out_file(c, "frozen_report.json"),
                     {{"conv_blobs", conv_blobs}, {"changed", changed}, {"ok", changed.empty()}});
        if (!changed.empty()) {
          std::cerr << "frozen check FAILED: " << changed.size() << " conv blobs changed, first '"
                    << changed.front() << "'\n";
          return 3;
        }
        std::cout << "frozen check: all " << conv_blobs << " conv blobs unchanged\n";
      }
    }
    save_checkpoint(result.best, out_file(c, "checkpoint.svgg"));
    result.best.stats.save(out_file(c, "norm_stats.json"));
    result.log.write_csv(out_file(c, "metrics.csv"));
    std::cout << "best validation accuracy " << result.best_val_acc << '\n';
    return 0;
  }

  if (extract->parsed()) {
    const Checkpoint ck = load_checkpoint(checkpoint);
    std::vector<Embedding> rows;
    const auto paths = read_list(list);
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const AudioBuffer audio = load_wav(paths[i]);
      if (audio.size() < kWindowSamples) {
        std::cerr << "warning: skipping " << paths[i] << " (" << audio.duration_ms()
                  << " ms is shorter than 1024 ms)\n";
        continue;
      }
      Rng rng = make_rng(cfg.seed, {tag(SeedStream::kSegments), i});
      rows.push_back(embed_recording(ck.model, audio, ck.stats, cfg.features.num_segments, rng,
                                     recording_id(paths[i])));
    }
    write_embeddings_tsv(out_file(c, "embeddings.tsv"), rows);
    cfg.write_resolved(c.out);
    std::cout << rows.size() << " of " << paths.size() << " recordings embedded\n";
    return 0;
  }

  if (dfl->parsed()) {
    const Checkpoint ck = load_checkpoint(checkpoint);
    const AudioBuffer a = load_wav(wav_a), b = load_wav(wav_b);
    TapMask taps{};
    for (int t : cfg.features.taps) taps[t - 1] = true;
    const std::size_t len = std::max(a.size(), b.size());
    const std::vector<std::size_t> starts =
        len <= kWindowSamples ? std::vector<std::size_t>{0} : sliding_window_starts(len);
    double total = 0.0;
    for (std::size_t s : starts) {
      std::vector<Canvas> ca{padded_window(a, s, ck.stats)}, cb{padded_window(b, s, ck.stats)};
      total += deep_feature_loss(ck.model, stack_canvases<float>(ca), stack_canvases<float>(cb),
                                 taps);
    }
    std::printf("%.9g\n", total / static_cast<double>(starts.size()));
    return 0;
  }

  if (fit->parsed() || eval->parsed()) {
    const LabeledFeatures data = join(embeddings, labels);
    if (fit->parsed()) {
      std::set<std::string> names(data.labels.begin(), data.labels.end());
      std::vector<std::string> classes(names.begin(), names.end());
      std::vector<int> y;
      for (const auto& l : data.labels)
        y.push_back(static_cast<int>(std::lower_bound(classes.begin(), classes.end(), l) -
                                     classes.begin()));
      FitReport rep = fit_logreg(data.x, y, cfg.features.classifier);
      rep.model.label_names = classes;
      rep.model.save(out_file(c, "logreg.json"));
      cfg.write_resolved(c.out);
      const ClassifierEval ev = evaluate_logreg(rep.model, data.x, y);
      std::cout << "train accuracy " << ev.accuracy << '\n';
      return 0;
    }
    const LogRegModel model = LogRegModel::load(model_path);
    std::vector<int> y;
    for (const auto& l : data.labels) {
      auto it = std::find(model.label_names.begin(), model.label_names.end(), l);
      if (it == model.label_names.end()) throw DataError("label '" + l + "' unknown to the model");
      y.push_back(static_cast<int>(it - model.label_names.begin()));
    }
    const ClassifierEval ev = evaluate_logreg(model, data.x, y);
    std::cout << "accuracy " << ev.accuracy << '\n';
    print_confusion(ev.confusion, model.label_names);
    return 0;
  }

  if (dream->parsed()) {
    const Checkpoint ck = load_checkpoint(checkpoint);
    if (!layer.empty()) cfg.dream.layer = layer;
    cfg.dream.validate();
    resolve_dream_layer(ck.model, cfg.dream.layer);
    const DreamResult r = maximize_activation(ck.model, cfg.dream);
    render_pgm(r.canvas, out_file(c, "dream.pgm"));
    write_canvas_csv(r.canvas, out_file(c, "dream.csv"));
    write_trace_csv(r.trace, out_file(c, "trace.csv"));
    cfg.write_resolved(c.out);
    std::printf("mean activation %.6g -> %.6g\n", r.trace.front(), r.trace.back());
    return 0;
  }

  if (synth->parsed()) {
    if (kind == "words") {
      WordCorpusOptions o;
      if (c.seed_set) o.seed = c.seed;
      generate_word_corpus(c.out, o);
    } else if (kind == "speakers") {
      SpeakerCorpusOptions o;
      if (c.seed_set) o.seed = c.seed;
      generate_speaker_corpus(c.out, o);
    } else {
      SceneCorpusOptions o;
      if (c.seed_set) o.seed = c.seed;
      generate_scene_corpus(c.out, o);
    }
    cfg.write_resolved(c.out);
    return 0;
  }

  if (make->parsed()) {
    const auto tr = parse_alignments(alignments_train);
    const Dictionary dict =
        build_dictionary(tr, cfg.dataset.dictionary_size, cfg.dataset.min_word_length);
    auto audio_for = [&](const std::vector<WordAlignment>& al) {
      std::map<std::string, std::string> m;
      for (const auto& a : al)
        m[a.utterance_id] = (fs::absolute(fs::path(audio_dir)) / (a.utterance_id + ".wav")).string();
      return m;
    };
    save_manifest(make_manifest(tr, dict, audio_for(tr), cfg.seed), out_file(c, "train.jsonl"));
    if (!alignments_val.empty()) {
      const auto va = parse_alignments(alignments_val);
      save_manifest(make_manifest(va, dict, audio_for(va), cfg.seed), out_file(c, "val.jsonl"));
    }
    std::ofstream words(out_file(c, "dictionary.txt"));
    for (const auto& w : dict.words()) words << w << '\n';
    cfg.write_resolved(c.out);
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
}

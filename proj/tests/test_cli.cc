// tests/test_cli.cc

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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "svgg/checkpoint.h"
#include "svgg/features.h"
#include "svgg/logreg.h"
#include "svgg/synth.h"
#include "svgg/wav.h"
#include "test_util.h"

namespace svgg {
namespace {

namespace fs = std::filesystem;

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir("cli");
    WordCorpusOptions w;
    w.num_classes = 4;
    w.train_per_class = 6;
    w.val_per_class = 2;
    words_ = new CorpusFiles(generate_word_corpus(file("words"), w));
    SceneCorpusOptions s;
    s.train_per_class = 3;
    s.test_per_class = 1;
    s.max_duration_s = 1.5;
    generate_scene_corpus(file("scenes"), s);
    write_config("tiny.json", R"({"seed": 1,
      "dataset": {"dictionary_size": 4},
      "model": {"width_scale": 0.0625, "fc_dims": [16, 16]},
      "train": {"epochs": 1, "batch_size": 8, "lr": 0.001},
      "features": {"num_segments": 3},
      "dream": {"steps": 3}})");
    const RunResult r = run("train --config " + file("tiny.json") + " --train " +
                            words_->train_manifest + " --val " + words_->val_manifest + " --out " +
                            file("pre"));
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static void TearDownTestSuite() {
    delete words_;
    delete dir_;
  }

  static std::string file(const std::string& name) { return dir_->file(name); }
  static std::string checkpoint() { return file("pre/checkpoint.svgg"); }
  static void write_config(const std::string& name, const std::string& json) {
    testing::write_bytes(file(name), json);
  }

  static RunResult run(const std::string& args) {
    static int n = 0;
    const std::string out = file("stdout" + std::to_string(n)), err = file("stderr" + std::to_string(n));
    ++n;
    const std::string cmd = std::string(SVGG_CLI_PATH) + " " + args + " >" + out + " 2>" + err;
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = testing::read_bytes(out);
    r.err = testing::read_bytes(err);
    return r;
  }

  static inline testing::TempDir* dir_ = nullptr;
  static inline CorpusFiles* words_ = nullptr;
};

TEST_F(CliTest, TrainWritesArtifacts) {
  for (const char* f : {"checkpoint.svgg", "norm_stats.json", "metrics.csv", "resolved_config.json"})
    EXPECT_TRUE(fs::exists(file(std::string("pre/") + f))) << f;
  const Checkpoint ck = load_checkpoint(checkpoint());
  EXPECT_EQ(ck.model.config().num_classes, 4);
  const auto resolved = nlohmann::json::parse(testing::read_bytes(file("pre/resolved_config.json")));
  EXPECT_EQ(resolved["train"]["epochs"], 1);
  EXPECT_EQ(resolved["seed"], 1);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run("").code, 1);
  EXPECT_EQ(run("bogus").code, 1);
  EXPECT_EQ(run("stats --out " + file("x")).code, 1);
  write_config("badkey.json", R"({"train": {"epochz": 3}})");
  const RunResult r = run("stats --config " + file("badkey.json") + " --manifest " +
                          words_->train_manifest + " --out " + file("badkey"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("train.epochz"), std::string::npos) << r.err;
}

TEST_F(CliTest, StatsAreReproducible) {
  const std::string base = "stats --manifest " + words_->train_manifest + " --out ";
  ASSERT_EQ(run(base + file("stats1")).code, 0);
  ASSERT_EQ(run(base + file("stats2") + " --workers 3").code, 0);
  EXPECT_TRUE(testing::read_bytes(file("stats1/norm_stats.json")) ==
              testing::read_bytes(file("stats2/norm_stats.json")));
  EXPECT_TRUE(fs::exists(file("stats1/resolved_config.json")));

  testing::write_bytes(file("empty.jsonl"), "");
  const RunResult r = run("stats --manifest " + file("empty.jsonl") + " --out " + file("stats3"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("empty manifest"), std::string::npos) << r.err;
}

TEST_F(CliTest, FineTuneModes) {
  const std::string base = "finetune --config " + file("tiny.json") + " --checkpoint " +
                           checkpoint() + " --train " + words_->train_manifest + " --val " +
                           words_->val_manifest;
  const RunResult bad = run(base + " --mode partial --out " + file("ft_bad"));
  EXPECT_NE(bad.code, 0);
  EXPECT_NE(bad.err.find("partial"), std::string::npos) << bad.err;

  const RunResult frozen = run(base + " --mode frozen --out " + file("ft_frozen"));
  ASSERT_EQ(frozen.code, 0) << frozen.err;
  EXPECT_NE(frozen.out.find("frozen check: all"), std::string::npos) << frozen.out;
  const auto report = nlohmann::json::parse(testing::read_bytes(file("ft_frozen/frozen_report.json")));
  EXPECT_TRUE(report["ok"].get<bool>());
  EXPECT_TRUE(report["changed"].empty());
  EXPECT_GT(report["conv_blobs"].get<int>(), 0);
  const Checkpoint before = load_checkpoint(checkpoint());
  const Checkpoint after = load_checkpoint(file("ft_frozen/checkpoint.svgg"));
  for (std::size_t i = 0; i < before.model.params().size(); ++i)
    if (!before.model.is_head_param(i)) {
      EXPECT_TRUE(before.model.params()[i].value == after.model.params()[i].value)
          << before.model.params()[i].name;
    }
  EXPECT_TRUE(fs::exists(file("ft_frozen/resolved_config.json")));
}

TEST_F(CliTest, ExtractSkipsShortRecordings) {
  AudioBuffer shortclip;
  shortclip.samples.assign(8000, 0.01f);
  write_wav(file("scenes/short.wav"), shortclip);
  {
    std::ofstream list(file("scenes/with_short.txt"));
    list << testing::read_bytes(file("scenes/train_list.txt")) << "short.wav\n";
  }
  const RunResult r = run("extract --config " + file("tiny.json") + " --checkpoint " +
                          checkpoint() + " --list " + file("scenes/with_short.txt") + " --out " +
                          file("emb_short"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("warning: skipping"), std::string::npos);
  EXPECT_NE(r.err.find("short.wav"), std::string::npos);
  const auto rows = read_embeddings_tsv(file("emb_short/embeddings.tsv"));
  EXPECT_EQ(rows.size(), 9u);
  for (const auto& row : rows) EXPECT_NE(row.source, "short");
}

TEST_F(CliTest, ExtractIsDeterministic) {
  const std::string base = "extract --config " + file("tiny.json") + " --checkpoint " +
                           checkpoint() + " --list " + file("scenes/test_list.txt") + " --out ";
  ASSERT_EQ(run(base + file("emb_a")).code, 0);
  ASSERT_EQ(run(base + file("emb_b")).code, 0);
  EXPECT_TRUE(testing::read_bytes(file("emb_a/embeddings.tsv")) ==
              testing::read_bytes(file("emb_b/embeddings.tsv")));
}

TEST_F(CliTest, DeepFeatureLossCommand) {
  const std::string a = words_->train.entries[0].audio, b = words_->train.entries[7].audio;
  const std::string base = "dfl --checkpoint " + checkpoint() + " ";
  const RunResult same = run(base + a + " " + a);
  ASSERT_EQ(same.code, 0) << same.err;
  EXPECT_EQ(same.out, "0\n");
  const RunResult ab = run(base + a + " " + b), ba = run(base + b + " " + a);
  ASSERT_EQ(ab.code, 0) << ab.err;
  EXPECT_EQ(ab.out, ba.out);
  EXPECT_GT(std::stod(ab.out), 0.0);
  // Lengths differ by more than a window stride.
  AudioBuffer longer = load_wav(a), shorter;
  for (int k = 0; k < 3; ++k) {
    const std::vector<float> copy = longer.samples;
    longer.samples.insert(longer.samples.end(), copy.begin(), copy.end());
  }
  shorter.samples.assign(longer.samples.begin(), longer.samples.begin() + 4000);
  write_wav(file("dfl_long.wav"), longer);
  write_wav(file("dfl_short.wav"), shorter);
  const RunResult ls = run(base + file("dfl_long.wav") + " " + file("dfl_short.wav"));
  const RunResult sl = run(base + file("dfl_short.wav") + " " + file("dfl_long.wav"));
  ASSERT_EQ(ls.code, 0) << ls.err;
  EXPECT_EQ(ls.out, sl.out);
  EXPECT_GT(std::stod(ls.out), 0.0);
  const RunResult missing = run(base + a + " " + file("nope.wav"));
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("nope.wav"), std::string::npos) << missing.err;
}

TEST_F(CliTest, ClassifyFitAndEval) {
  ASSERT_EQ(run("extract --config " + file("tiny.json") + " --checkpoint " + checkpoint() +
                " --list " + file("scenes/train_list.txt") + " --out " + file("emb_train"))
                .code,
            0);
  const std::string emb = file("emb_train/embeddings.tsv");
  const std::string labels = file("scenes/train_labels.csv");
  const RunResult fit =
      run("classify fit --embeddings " + emb + " --labels " + labels + " --out " + file("clf"));
  ASSERT_EQ(fit.code, 0) << fit.err;
  EXPECT_TRUE(fs::exists(file("clf/resolved_config.json")));
  const LogRegModel model = LogRegModel::load(file("clf/logreg.json"));
  EXPECT_EQ(model.label_names, (std::vector<std::string>{"music", "noise", "speech"}));
  const RunResult ev = run("classify eval --embeddings " + emb + " --labels " + labels +
                           " --model " + file("clf/logreg.json"));
  ASSERT_EQ(ev.code, 0) << ev.err;
  EXPECT_EQ(ev.out.rfind("accuracy 1\n", 0), 0u) << ev.out;

  testing::write_bytes(file("extra_labels.csv"),
                       testing::read_bytes(labels) + "ghost_recording,music\n");
  const RunResult missing = run("classify eval --embeddings " + emb + " --labels " +
                                file("extra_labels.csv") + " --model " + file("clf/logreg.json"));
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("ghost_recording"), std::string::npos) << missing.err;
}

TEST_F(CliTest, DreamCommand) {
  const RunResult r = run("dream --config " + file("tiny.json") + " --checkpoint " + checkpoint() +
                          " --layer 2 --out " + file("dream"));
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"dream.pgm", "dream.csv", "trace.csv", "resolved_config.json"})
    EXPECT_TRUE(fs::exists(file(std::string("dream/") + f))) << f;
  std::ifstream trace(file("dream/trace.csv"));
  std::string line;
  int lines = 0;
  while (std::getline(trace, line)) ++lines;
  EXPECT_EQ(lines, 1 + 4);  // header plus steps + 1 values
  const RunResult bad = run("dream --config " + file("tiny.json") + " --checkpoint " +
                            checkpoint() + " --layer 7 --out " + file("dream_bad"));
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("out of range"), std::string::npos) << bad.err;
}

TEST_F(CliTest, ManifestCommand) {
  const RunResult r = run("manifest --config " + file("tiny.json") + " --train-alignments " +
                          words_->alignments + " --audio-dir " + file("words") + " --out " +
                          file("man"));
  ASSERT_EQ(r.code, 0) << r.err;
  const DatasetManifest m = load_manifest(file("man/train.jsonl"));
  EXPECT_EQ(m.size(), 32u);
  for (const auto& e : m.entries) EXPECT_TRUE(fs::exists(e.audio)) << e.audio;
  EXPECT_TRUE(fs::exists(file("man/dictionary.txt")));
  EXPECT_TRUE(fs::exists(file("man/resolved_config.json")));
}

}  // namespace
}  // namespace svgg

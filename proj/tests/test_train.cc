// tests/test_train.cc

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

#include <algorithm>
#include <cmath>
#include <cstring>

#include <gtest/gtest.h>

#include "svgg/checkpoint.h"
#include "svgg/error.h"
#include "svgg/synth.h"
#include "svgg/train.h"
#include "test_util.h"

namespace svgg {
namespace {

using testing::tiny_config;

// One small word corpus shared by the whole suite.
class TrainTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir("train");
    WordCorpusOptions o;
    o.num_classes = 4;
    o.train_per_class = 6;
    o.val_per_class = 2;
    o.seed = 17;
    files_ = new CorpusFiles(generate_word_corpus(dir_->path().string(), o));
  }
  static void TearDownTestSuite() {
    delete files_;
    delete dir_;
  }

  static TrainConfig quick(int epochs = 2) {
    TrainConfig c;
    c.epochs = epochs;
    c.batch_size = 8;
    c.lr = 1e-3;
    c.seed = 4;
    return c;
  }

  static testing::TempDir* dir_;
  static CorpusFiles* files_;
};

testing::TempDir* TrainTest::dir_ = nullptr;
CorpusFiles* TrainTest::files_ = nullptr;

bool same_params(const SpeechVGG& a, const SpeechVGG& b, std::size_t p) {
  const auto& x = a.params()[p].value;
  const auto& y = b.params()[p].value;
  return x.shape() == y.shape() && std::memcmp(x.data(), y.data(), 4 * x.size()) == 0;
}

std::vector<std::vector<double>> log_numbers(const MetricsLog& log) {
  std::vector<std::vector<double>> out;
  for (const auto& s : log.steps)
    out.push_back({double(s.step), double(s.epoch), s.loss, s.train_acc,
                   std::isnan(s.val_acc) ? -1.0 : s.val_acc});
  return out;
}

TEST(TrainConfigJson, StrictKeysAndValidation) {
  TrainConfig c;
  c.epochs = 3;
  c.lr = 0.01;
  const TrainConfig r = TrainConfig::from_json(c.to_json());
  EXPECT_EQ(r.epochs, 3);
  EXPECT_EQ(r.lr, 0.01);
  try {
    TrainConfig::from_json({{"epocs", 3}});
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("epocs"), std::string::npos);
  }
  EXPECT_THROW(TrainConfig::from_json({{"epochs", 0}}), UsageError);
  EXPECT_THROW(TrainConfig::from_json({{"batch_size", 0}}), UsageError);
}

TEST(MetricsLogCsv, HeaderAndEmptyCells) {
  MetricsLog log;
  StepRecord a;
  a.step = 1;
  a.epoch = 1;
  a.loss = 0.5;
  a.train_acc = 0.25;
  log.steps.push_back(a);
  a.step = 2;
  a.val_acc = 0.75;
  log.steps.push_back(a);
  const std::string csv = log.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "step,epoch,loss,train_acc,val_acc,seconds");
  EXPECT_NE(csv.find("1,1,0.5,0.25,,"), std::string::npos) << csv;
  EXPECT_NE(csv.find("2,1,0.5,0.25,0.75,"), std::string::npos) << csv;
}

TEST_F(TrainTest, DeterministicAndWorkerInvariant) {
  const TrainConfig c = quick();
  const TrainResult a = train_word_classifier(files_->train, files_->val, tiny_config(), c);
  const TrainResult b = train_word_classifier(files_->train, files_->val, tiny_config(), c);
  TrainConfig w = c;
  w.workers = 3;
  const TrainResult m = train_word_classifier(files_->train, files_->val, tiny_config(), w);
  const std::string bytes = serialize_checkpoint(a.best);
  EXPECT_TRUE(bytes == serialize_checkpoint(b.best));
  const std::string threaded = serialize_checkpoint(m.best);
  EXPECT_TRUE(bytes == threaded);
  if (bytes != threaded) {
    const Checkpoint back = deserialize_checkpoint(threaded);
    EXPECT_EQ(back.metadata, a.best.metadata);
    EXPECT_EQ(back.stats.mean, a.best.stats.mean);
    for (std::size_t p = 0; p < back.model.params().size(); ++p)
      EXPECT_TRUE(same_params(back.model, a.best.model, p)) << back.model.params()[p].name;
  }
  EXPECT_EQ(log_numbers(a.log), log_numbers(b.log));
  ASSERT_EQ(a.log.steps.size(), 2u * 3u);
  for (std::size_t i = 0; i < a.log.steps.size(); ++i) EXPECT_EQ(a.log.steps[i].step, std::int64_t(i + 1));
}

TEST_F(TrainTest, StatsComeFromTrainingManifestOnly) {
  const TrainResult r = train_word_classifier(files_->train, files_->val, tiny_config(), quick(1));
  const NormStats expect = manifest_norm_stats(files_->train);
  EXPECT_EQ(r.best.stats.mean, expect.mean);
  EXPECT_EQ(r.best.stats.std, expect.std);
  EXPECT_EQ(r.best.dictionary_hash, manifest_dictionary_hash(files_->train));
}

TEST_F(TrainTest, Errors) {
  const DatasetManifest empty;
  EXPECT_THROW(train_word_classifier(empty, files_->val, tiny_config(), quick()), DataError);
  EXPECT_THROW(train_word_classifier(files_->train, empty, tiny_config(), quick()), DataError);
  DatasetManifest clash = files_->val;
  clash.entries[0].label = (clash.entries[0].label + 1) % 4;
  EXPECT_THROW(train_word_classifier(files_->train, clash, tiny_config(), quick()), DataError);
  EXPECT_THROW(train_word_classifier(files_->train, files_->val, tiny_config(3), quick()),
               DataError);
}

TEST_F(TrainTest, LossTrendsDownAndMemorizes) {
  TrainConfig c = quick(50);
  c.batch_size = 6;
  c.augment_enabled = false;
  const TrainResult r = train_word_classifier(files_->train, files_->val, tiny_config(), c);
  ASSERT_GE(r.log.steps.size(), 200u);
  std::vector<double> first, last;
  for (std::size_t i = 0; i < 50; ++i) first.push_back(r.log.steps[i].loss);
  for (std::size_t i = 150; i < 200; ++i) last.push_back(r.log.steps[i].loss);
  auto median = [](std::vector<double> v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  EXPECT_LT(median(last), median(first));
  const SpeechVGG& final_model = r.best.model;
  EXPECT_GE(evaluate(final_model, r.best.stats, files_->train).accuracy, 0.95);
}

TEST_F(TrainTest, FrozenFineTuneLeavesConvolutionsBitwise) {
  Checkpoint base;
  base.model = SpeechVGG::build(tiny_config(), 8);
  base.stats = manifest_norm_stats(files_->train);
  TrainConfig c = quick(10);
  c.verify_frozen = true;
  c.epochs = 4;  // 12 optimizer steps
  const TrainResult r = fine_tune(base, FineTuneMode::kFrozen, files_->train, files_->val, c);
  EXPECT_TRUE(changed_conv_params(base.model, r.best.model).empty());
  EXPECT_EQ(r.best.model.trainable_mode(), TrainableMode::kHeadOnly);
  bool head_moved = false;
  for (std::size_t p = 0; p < base.model.params().size(); ++p)
    if (base.model.is_head_param(p)) head_moved |= !same_params(base.model, r.best.model, p);
  EXPECT_TRUE(head_moved);
  EXPECT_EQ(r.best.stats.mean, base.stats.mean);
}

TEST_F(TrainTest, FreshAndFinetuneModes) {
  Checkpoint base;
  base.model = SpeechVGG::build(tiny_config(), 8);
  base.stats = manifest_norm_stats(files_->train);
  const TrainResult fresh = fine_tune(base, FineTuneMode::kFresh, files_->train, files_->val, quick(1));
  for (const char* name : {"block1_conv1.weight", "block3_conv2.weight", "block5_conv3.bias"}) {
    const auto& a = base.model.params()[base.model.param_index(name)].value;
    const auto& b = fresh.best.model.params()[fresh.best.model.param_index(name)].value;
    std::size_t equal = 0;
    for (std::size_t i = 0; i < a.size(); ++i) equal += a[i] == b[i];
    EXPECT_LT(equal * 100, a.size()) << name;
  }
  const TrainResult ft = fine_tune(base, FineTuneMode::kFinetune, files_->train, files_->val, quick(1));
  EXPECT_FALSE(changed_conv_params(base.model, ft.best.model).empty());
  EXPECT_EQ(parse_fine_tune_mode("frozen"), FineTuneMode::kFrozen);
  EXPECT_THROW(parse_fine_tune_mode("thaw"), UsageError);
}

TEST_F(TrainTest, EvaluateContract) {
  const SpeechVGG m = SpeechVGG::build(tiny_config(), 1);
  const NormStats stats = manifest_norm_stats(files_->train);
  const EvalResult r = evaluate(m, stats, files_->val);
  EXPECT_EQ(r.total, files_->val.size());
  std::size_t diag = 0, sum = 0;
  for (std::size_t i = 0; i < r.confusion.size(); ++i)
    for (std::size_t j = 0; j < r.confusion.size(); ++j) {
      sum += r.confusion[i][j];
      if (i == j) diag += r.confusion[i][j];
    }
  EXPECT_EQ(sum, r.total);
  EXPECT_DOUBLE_EQ(r.accuracy, double(diag) / double(sum));
  EXPECT_THROW(evaluate(m, stats, DatasetManifest{}), DataError);
  EXPECT_THROW(evaluate(SpeechVGG::build(tiny_config(2), 1), stats, files_->val), DataError);
}

// An untrained network is close to chance on balanced random inputs.
TEST(Evaluate, UntrainedIsNearChance) {
  const int k = 4, n = 400;
  SpectrogramSet set;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int i = 0; i < n; ++i) {
    LogMagSpectrogram s;
    s.values.resize(128, 60);
    for (Eigen::Index j = 0; j < s.values.size(); ++j) s.values.data()[j] = g(rng);
    s.normalized = true;
    set.specs.push_back(s);
    set.labels.push_back(i % k);
  }
  const double p = 1.0 / k, sigma = std::sqrt(p * (1 - p) / n);
  for (std::uint64_t seed : {1, 2, 3}) {
    const EvalResult r = evaluate(SpeechVGG::build(tiny_config(k), seed), set);
    EXPECT_NEAR(r.accuracy, p, 3 * sigma);
  }
}

}  // namespace
}  // namespace svgg

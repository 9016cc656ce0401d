// tests/acceptance.cc

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

// Acceptance suite: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gradcheck.h"
#include "svgg/augment.h"
#include "svgg/checkpoint.h"
#include "svgg/dream.h"
#include "svgg/error.h"
#include "svgg/features.h"
#include "svgg/layers.h"
#include "svgg/logreg.h"
#include "svgg/stft.h"
#include "svgg/synth.h"
#include "svgg/train.h"
#include "test_util.h"

namespace svgg {
namespace {

using testing::random_tensor;
using testing::weighted_sum;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += "failed: " + what;
    }
  }
  void note(const std::string& s) {
    if (!detail.empty()) detail += "; ";
    detail += s;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

AudioBuffer white_noise(std::size_t n, std::uint64_t seed, float sd = 0.2f) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, sd);
  AudioBuffer a;
  a.samples.resize(n);
  for (auto& v : a.samples) v = g(rng);
  return a;
}

ModelConfig toy_config(int classes) {
  ModelConfig c;
  c.width_scale = 0.25;
  c.fc_dims = {256, 256};
  c.num_classes = classes;
  return c;
}

// State shared by the criteria that reuse the toy pre-trained model.
struct Shared {
  std::string workdir;
  std::optional<Checkpoint> toy;
};

// 1. Layer and deep-feature-loss gradients.
Outcome gradients(Shared&) {
  Outcome o;
  std::mt19937_64 rng(2024);
  auto dim = [&](int lo, int hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
  testing::GradCheckResult conv, pool, relu, dense, ce, dfl;
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = dim(1, 3), c = dim(1, 4), h = 2 * dim(1, 4), w = 2 * dim(1, 4),
                      k = dim(1, 5);
    const std::uint64_t s = 100 * trial;
    {
      auto x = random_tensor<double>({n, c, h, w}, s + 1);
      auto wt = random_tensor<double>({k, c, 3, 3}, s + 2);
      auto b = random_tensor<double>({k}, s + 3);
      const auto r = random_tensor<double>({n, k, h, w}, s + 4);
      Tensor<double> dw(wt.shape()), db(b.shape());
      auto dx = conv3x3_backward(x, wt, r, &dw, &db);
      auto loss = [&] { return weighted_sum(conv3x3_forward(x, wt, b), r); };
      testing::merge(conv, testing::check_tensor(x, dx, loss, 200, s + 5));
      testing::merge(conv, testing::check_tensor(wt, dw, loss, 200, s + 6));
      testing::merge(conv, testing::check_tensor(b, db, loss, 200, s + 7));
    }
    {
      auto x = random_tensor<double>({n, c, h, w}, s + 8);
      const auto p = maxpool2x2_forward(x);
      const auto r = random_tensor<double>(p.y.shape(), s + 9);
      auto dx = maxpool2x2_backward(x.shape(), p.argmax, r);
      auto loss = [&] { return weighted_sum(maxpool2x2_forward(x).y, r); };
      testing::merge(pool, testing::check_tensor(x, dx, loss, 200, s + 10));
    }
    {
      auto x = random_tensor<double>({n, c * h * w}, s + 11);
      const auto r = random_tensor<double>(x.shape(), s + 12);
      auto dx = relu_backward(relu_forward(x), r);
      auto loss = [&] { return weighted_sum(relu_forward(x), r); };
      testing::merge(relu, testing::check_tensor(x, dx, loss, 200, s + 13));
    }
    {
      const std::size_t d = dim(1, 20);
      auto x = random_tensor<double>({n, d}, s + 14);
      auto wt = random_tensor<double>({k, d}, s + 15);
      auto b = random_tensor<double>({k}, s + 16);
      const auto r = random_tensor<double>({n, k}, s + 17);
      Tensor<double> dw(wt.shape()), db(b.shape());
      auto dx = dense_backward(x, wt, r, &dw, &db);
      auto loss = [&] { return weighted_sum(dense_forward(x, wt, b), r); };
      testing::merge(dense, testing::check_tensor(x, dx, loss, 200, s + 18));
      testing::merge(dense, testing::check_tensor(wt, dw, loss, 200, s + 19));
      testing::merge(dense, testing::check_tensor(b, db, loss, 200, s + 20));
    }
    {
      const std::size_t classes = dim(2, 8);
      auto z = random_tensor<double>({n, classes}, s + 21, 2.0);
      std::vector<int> labels(n);
      for (auto& l : labels) l = static_cast<int>(dim(0, classes - 1));
      const auto out = softmax_cross_entropy(z, labels);
      auto loss = [&] { return softmax_cross_entropy(z, labels).loss; };
      testing::merge(ce, testing::check_tensor(z, out.grad, loss, 200, s + 22));
    }
  }
  for (std::uint64_t s = 0; s < 2; ++s) {
    const auto m = BasicSpeechVGG<float>::build(testing::tiny_config(), 30 + s).cast<double>();
    auto x = random_tensor<double>({1, 1, 128, 128}, 40 + s);
    const auto y = random_tensor<double>({1, 1, 128, 128}, 50 + s);
    const auto out = deep_feature_loss_with_grad(m, x, y);
    auto loss = [&] { return deep_feature_loss(m, x, y); };
    testing::merge(dfl, testing::check_tensor(x, out.grad_x, loss, 150, 60 + s));
  }
  const std::pair<const char*, const testing::GradCheckResult*> all[] = {
      {"conv", &conv}, {"pool", &pool}, {"relu", &relu}, {"dense", &dense}, {"ce", &ce}, {"dfl", &dfl}};
  for (const auto& [name, r] : all) {
    o.note(std::string(name) + " " + fmt("%.2e", r->max_rel_error));
    o.require(r->max_rel_error < 1e-4, std::string(name) + " rel error < 1e-4");
    o.require(r->checked > 0 && r->skipped * 10 <= r->checked,
              std::string(name) + " enough coordinates checked off kinks");
  }
  return o;
}

// 2. STFT frame count, bin placement and resynthesis.
Outcome front_end(Shared&) {
  Outcome o;
  const StftConfig cfg;
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> len(256, 48000);
  int bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = len(rng);
    const int expect = static_cast<int>((n - 256) / 128 + 1);
    bad += cfg.num_frames(n) != expect;
    if (i % 10 == 0) bad += stft(white_noise(n, i)).num_frames() != expect;
  }
  o.require(bad == 0, std::to_string(bad) + " frame-count mismatches");

  AudioBuffer sine;
  for (int i = 0; i < 16000; ++i)
    sine.samples.push_back(static_cast<float>(0.5 * std::sin(2 * std::numbers::pi * 1000.0 * i / 16000.0)));
  Eigen::VectorXd mag = stft(sine).values.cwiseAbs().rowwise().mean();
  Eigen::Index peak = 0;
  mag.maxCoeff(&peak);
  o.note("1 kHz peak bin " + std::to_string(peak));
  o.require(peak == 16, "1 kHz sine peaks at bin 16");

  const AudioBuffer a = white_noise(16000, 99);
  const ComplexSpectrogram s = stft(a);
  const AudioBuffer r = istft(s);
  const auto [lo, hi] = istft_interior(s);
  double sig = 0.0, err = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    sig += double(a.samples[i]) * a.samples[i];
    err += std::pow(double(a.samples[i]) - r.samples[i], 2);
  }
  const double snr = 10.0 * std::log10(sig / std::max(err, 1e-300));
  o.note(err == 0.0 ? std::string("round-trip exact") : "round-trip SNR " + fmt("%.1f", snr) + " dB");
  o.require(snr > 50.0, "round-trip SNR > 50 dB");
  return o;
}

// 3. Tap sizes and embedding length.
Outcome architecture(Shared&) {
  Outcome o;
  const std::vector<std::size_t> expect_sizes{64, 32, 16, 8, 4};
  const ModelConfig def;
  o.require(def.embedding_dim() == 8192, "default embedding length 8192");
  ModelConfig quarter = def;
  quarter.width_scale = 0.25;
  o.require(quarter.embedding_dim() == 2048, "width 0.25 embedding length 2048");

  const auto x = random_tensor<float>({1, 1, 128, 128}, 1);
  for (const ModelConfig& c : {def, quarter}) {
    const SpeechVGG m = SpeechVGG::build(c, 1);
    const auto out = m.forward_with_taps(x);
    for (int b = 0; b < kNumBlocks; ++b) {
      const Shape& s = out.taps.taps[b].shape();
      o.require(s[2] == expect_sizes[b] && s[3] == expect_sizes[b],
                "tap " + std::to_string(b + 1) + " spatial size");
    }
    o.require(m.embed(x).size() == c.embedding_dim(), "flattened last tap length");
  }
  o.note("taps [64,32,16,8,4], embedding 8192 / 2048");
  return o;
}

// 4. Masked fraction cap.
Outcome spec_augment_cap(Shared&) {
  Outcome o;
  std::mt19937_64 g(5);
  std::normal_distribution<float> nd(0.0f, 1.0f);
  Canvas c(kCanvasSize, kCanvasSize);
  for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = nd(g);
  const AugmentPolicy p;
  double worst_f = 0.0, worst_t = 0.0;
  for (int s = 0; s < 10000; ++s) {
    Rng rng = make_rng(1234, {std::uint64_t(s)});
    AugmentRecord rec;
    const Canvas out = spec_augment(c, p, rng, &rec);
    // Measured from the output cells, independently of the record.
    int rows = 0, cols = 0;
    for (int f = 0; f < kCanvasSize; ++f) rows += (out.row(f).array() == rec.fill).all();
    for (int t = 0; t < kCanvasSize; ++t) cols += (out.col(t).array() == rec.fill).all();
    worst_f = std::max({worst_f, masked_fraction(rec, 0), rows / double(kCanvasSize)});
    worst_t = std::max({worst_t, masked_fraction(rec, 1), cols / double(kCanvasSize)});
  }
  o.note("max masked fraction freq " + fmt("%.3f", worst_f) + " time " + fmt("%.3f", worst_t));
  o.require(worst_f <= 0.5 && worst_t <= 0.5, "masked fraction <= 0.5");
  AugmentPolicy zero;
  zero.max_fraction_per_dim = 0.0;
  bool identity = true;
  for (int s = 0; s < 100; ++s) {
    Rng rng(s);
    identity &= spec_augment(c, zero, rng) == c;
  }
  o.require(identity, "zero-width policy is the identity");
  return o;
}

// 5. Toy pre-training on the synthetic word corpus.
Outcome toy_training(Shared& sh) {
  Outcome o;
  const CorpusFiles words = generate_word_corpus(sh.workdir + "/words");
  o.require(words.train.size() == 500 && words.val.size() == 100, "500 / 100 clips");
  TrainConfig tc;
  tc.epochs = 15;
  tc.lr = 1e-3;
  tc.batch_size = 16;
  tc.seed = 5;
  const TrainResult r = train_word_classifier(words.train, words.val, toy_config(10), tc);
  sh.toy = r.best;
  o.note("best validation accuracy " + fmt("%.3f", r.best_val_acc));
  o.require(r.best_val_acc >= 0.95, "validation accuracy >= 0.95");
  return o;
}

// 6. Frozen versus finetune on the speaker task.
Outcome fine_tune_modes(Shared& sh) {
  Outcome o;
  if (!sh.toy) {
    o.require(false, "toy model unavailable");
    return o;
  }
  const CorpusFiles spk = generate_speaker_corpus(sh.workdir + "/speakers");
  TrainConfig tc;
  tc.epochs = 10;
  tc.lr = 3e-4;
  tc.batch_size = 16;
  tc.seed = 6;
  const TrainResult frozen = fine_tune(*sh.toy, FineTuneMode::kFrozen, spk.train, spk.val, tc);
  const TrainResult tuned = fine_tune(*sh.toy, FineTuneMode::kFinetune, spk.train, spk.val, tc);
  o.note("frozen " + fmt("%.3f", frozen.best_val_acc) + " finetune " + fmt("%.3f", tuned.best_val_acc));
  o.require(tuned.best_val_acc >= frozen.best_val_acc, "finetune >= frozen");
  std::size_t conv = 0, changed = 0;
  const auto& a = sh.toy->model.params();
  const auto& b = frozen.best.model.params();
  for (std::size_t p = 0; p < a.size(); ++p) {
    if (sh.toy->model.is_head_param(p)) continue;
    ++conv;
    changed += a[p].value.shape() != b[p].value.shape() ||
               std::memcmp(a[p].value.data(), b[p].value.data(), 4 * a[p].value.size()) != 0;
  }
  o.note(std::to_string(conv - changed) + "/" + std::to_string(conv) + " conv blobs unchanged");
  o.require(changed == 0 && conv > 0, "frozen conv parameters bitwise unchanged");
  return o;
}

double tap_oracle(const SpeechVGG& m, const Tensor<float>& x, const Tensor<float>& y) {
  const auto tx = m.forward_with_taps(x).taps.taps;
  const auto ty = m.forward_with_taps(y).taps.taps;
  double total = 0.0;
  for (int b = 0; b < kNumBlocks; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < tx[b].size(); ++i) s += std::abs(double(tx[b][i]) - ty[b][i]);
    total += s / tx[b].size();
  }
  return total;
}

// 7. Deep feature loss pseudometric.
Outcome feature_loss_metric(Shared&) {
  Outcome o;
  const SpeechVGG m = SpeechVGG::build(testing::tiny_config(), 77);
  constexpr int kPool = 40;
  std::vector<Tensor<float>> xs;
  for (int i = 0; i < kPool; ++i)
    xs.push_back(random_tensor<float>({1, 1, 128, 128}, 500 + i, 0.5 + 0.05 * i));
  std::vector<std::vector<double>> d(kPool, std::vector<double>(kPool));
  double worst_oracle = 0.0;
  bool zero = true, symmetric = true, positive = true;
  for (int i = 0; i < kPool; ++i) {
    zero &= deep_feature_loss(m, xs[i], xs[i]) == 0.0;
    for (int j = 0; j < kPool; ++j) {
      d[i][j] = deep_feature_loss(m, xs[i], xs[j]);
      if (i != j) positive &= d[i][j] > 0.0;
      if (j < i) symmetric &= d[i][j] == d[j][i];
      if (j == (i + 1) % kPool)
        worst_oracle = std::max(worst_oracle, std::abs(d[i][j] - tap_oracle(m, xs[i], xs[j])) / d[i][j]);
    }
  }
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> pick(0, kPool - 1);
  int violations = 0;
  for (int t = 0; t < 1000; ++t) {
    const int a = pick(rng), b = pick(rng), c = pick(rng);
    violations += d[a][c] > d[a][b] + d[b][c] + 1e-9;
  }
  o.require(zero, "zero on identical inputs");
  o.require(symmetric, "symmetric");
  o.require(positive, "positive on distinct inputs");
  o.require(violations == 0, std::to_string(violations) + " triangle violations");
  o.require(worst_oracle < 1e-9, "matches recompute-from-taps oracle");
  o.note("1000 triples, oracle rel diff " + fmt("%.1e", worst_oracle));
  return o;
}

// 8. Linear probe on segment-averaged embeddings.
Outcome downstream(Shared& sh) {
  Outcome o;
  if (!sh.toy) {
    o.require(false, "toy model unavailable");
    return o;
  }
  const SceneCorpus scenes = generate_scene_corpus(sh.workdir + "/scenes");
  auto embed = [&](const std::vector<LabeledRecording>& recs, std::vector<std::vector<double>>& x,
                   std::vector<int>& y) {
    for (std::size_t i = 0; i < recs.size(); ++i) {
      Rng rng = make_rng(8, {tag(SeedStream::kSegments), i});
      const Embedding e = embed_recording(sh.toy->model, load_wav(recs[i].path), sh.toy->stats, 20, rng);
      x.emplace_back(e.values.begin(), e.values.end());
      y.push_back(recs[i].label);
    }
  };
  std::vector<std::vector<double>> xtr, xte;
  std::vector<int> ytr, yte;
  embed(scenes.train, xtr, ytr);
  embed(scenes.test, xte, yte);
  const FitReport fit = fit_logreg(xtr, ytr);
  const double acc = evaluate_logreg(fit.model, xte, yte).accuracy;
  o.note(std::to_string(xtr.size()) + " train / " + std::to_string(xte.size()) +
         " test, held-out accuracy " + fmt("%.3f", acc));
  o.require(acc >= 0.9, "held-out accuracy >= 0.9");
  return o;
}

// 9. Sliding-window arithmetic and averaged distributions.
Outcome sliding_windows(Shared&) {
  Outcome o;
  o.require(sliding_window_starts(24576) == std::vector<std::size_t>{0, 8192},
            "1536 ms gives windows at 0 and 8192");
  o.require(sliding_window_starts(16384) == std::vector<std::size_t>{0}, "1024 ms gives one window");
  bool counts = true;
  for (std::size_t n = 16384; n < 100000; n += 331) {
    const auto s = sliding_window_starts(n);
    counts &= s.size() == 1 + (n - 16384 + 8191) / 8192;
    for (std::size_t i = 0; i < s.size(); ++i) counts &= s[i] == 8192 * i;
  }
  o.require(counts, "window count 1 + ceil((N - 16384) / 8192)");
  const SpeechVGG m = SpeechVGG::build(testing::tiny_config(6), 9);
  NormStats stats;
  stats.mean.assign(128, -3.0);
  stats.std.assign(128, 2.0);
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 12; ++s) {
    const auto p = sliding_predictions(m, white_noise(16384 + 2731 * s, s), stats);
    double sum = 0.0;
    for (double v : p.distribution) sum += v;
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  o.note("max |sum - 1| " + fmt("%.1e", worst));
  o.require(worst <= 1e-6, "distributions sum to 1 within 1e-6");
  return o;
}

// 10. Seeded reproducibility and checkpoint integrity.
Outcome determinism(Shared& sh) {
  Outcome o;
  WordCorpusOptions wo;
  wo.num_classes = 4;
  wo.train_per_class = 6;
  wo.val_per_class = 2;
  const CorpusFiles words = generate_word_corpus(sh.workdir + "/det_words", wo);
  TrainConfig tc;
  tc.epochs = 2;
  tc.batch_size = 8;
  tc.lr = 1e-3;
  tc.seed = 10;
  tc.workers = 1;
  const TrainResult a = train_word_classifier(words.train, words.val, testing::tiny_config(), tc);
  const TrainResult b = train_word_classifier(words.train, words.val, testing::tiny_config(), tc);
  const std::string bytes = serialize_checkpoint(a.best);
  o.require(bytes == serialize_checkpoint(b.best), "identical seeds give identical checkpoints");

  const std::string path = sh.workdir + "/det.svgg";
  save_checkpoint(a.best, path);
  o.require(testing::read_bytes(path) == bytes, "saved file equals serialized bytes");
  o.require(serialize_checkpoint(load_checkpoint(path)) == bytes, "load then save is bitwise identity");

  // Corrupt one byte inside a blob, located by searching for its raw data.
  const auto& params = a.best.model.params();
  int named = 0, tried = 0;
  for (std::size_t p : {std::size_t(0), params.size() / 2, params.size() - 1}) {
    const auto& v = params[p].value;
    const std::size_t len = std::min<std::size_t>(4 * v.size(), 256);
    const std::string needle(reinterpret_cast<const char*>(v.data()), len);
    const std::size_t at = bytes.find(needle);
    if (at == std::string::npos) continue;
    ++tried;
    std::string bad = bytes;
    bad[at + len / 2] ^= 0x21;
    try {
      deserialize_checkpoint(bad);
    } catch (const DataError& e) {
      named += std::string(e.what()).find(params[p].name) != std::string::npos;
    }
  }
  o.require(tried == 3 && named == 3, "corrupted blobs rejected with their names");
  o.note("checkpoint " + std::to_string(bytes.size()) + " bytes, " + std::to_string(named) +
         "/3 corruptions named");
  return o;
}

// 11. Activation maximisation per tap.
Outcome dream_ascent(Shared& sh) {
  Outcome o;
  if (!sh.toy) {
    o.require(false, "toy model unavailable");
    return o;
  }
  const SpeechVGG& m = sh.toy->model;
  const std::string before = serialize_checkpoint(*sh.toy);
  DreamConfig cfg;
  cfg.steps = 200;
  cfg.step_size = 0.05;
  cfg.seed = 3;
  std::string ratios;
  std::vector<double> first_trace;
  for (int t = 1; t <= kNumBlocks; ++t) {
    cfg.layer = std::to_string(t);
    const DreamResult r = maximize_activation(m, cfg);
    const double ratio = r.trace.back() / r.trace.front();
    ratios += (t > 1 ? " " : "") + fmt("%.1f", ratio);
    o.require(r.trace.front() > 0.0 && ratio >= 10.0, "tap " + cfg.layer + " ratio >= 10");
    if (t == 1) first_trace = r.trace;
  }
  cfg.layer = "1";
  o.require(maximize_activation(m, cfg).trace == first_trace, "seed-reproducible");
  o.require(serialize_checkpoint(*sh.toy) == before, "model unchanged");
  o.note("final/initial " + ratios);
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;  // 0 = no runtime limit
  std::function<Outcome(Shared&)> run;
};

}  // namespace
}  // namespace svgg

int main(int argc, char** argv) {
  using namespace svgg;
  CLI::App app("acceptance criteria");
  std::vector<int> only;
  std::string workdir, report;
  app.add_option("--only", only, "criteria to run (default: all)")->delimiter(',');
  app.add_option("--workdir", workdir, "scratch directory (default: a temp dir)");
  app.add_option("--report", report, "also write the result lines to this file");
  CLI11_PARSE(app, argc, argv);

  std::optional<testing::TempDir> tmp;
  Shared sh;
  if (workdir.empty()) {
    tmp.emplace("acceptance");
    sh.workdir = tmp->path().string();
  } else {
    std::filesystem::create_directories(workdir);
    sh.workdir = workdir;
  }

  const std::vector<Criterion> criteria = {
      {1, "gradient integrity", 120, gradients},
      {2, "front-end exactness", 30, front_end},
      {3, "architecture arithmetic", 0, architecture},
      {4, "SpecAugment cap", 30, spec_augment_cap},
      {5, "toy end-to-end training", 900, toy_training},
      {6, "fine-tuning mode ordering", 1200, fine_tune_modes},
      {7, "deep feature loss pseudometric", 60, feature_loss_metric},
      {8, "downstream protocol", 300, downstream},
      {9, "sliding-window averaging", 0, sliding_windows},
      {10, "determinism and serialization", 0, determinism},
      {11, "dream ascent", 120, dream_ascent},
  };
  // Criteria that reuse the toy model need 5 to have run.
  std::set<int> selected(only.begin(), only.end());
  const bool all = selected.empty();
  for (int id : {6, 8, 11})
    if (selected.count(id)) selected.insert(5);

  std::FILE* rep = report.empty() ? nullptr : std::fopen(report.c_str(), "w");
  int failed = 0;
  for (const auto& c : criteria) {
    if (!all && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(sh);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_s > 0) o.require(secs < c.budget_s, "runtime < " + fmt("%.0f", c.budget_s) + " s");
    failed += !o.pass;
    for (std::FILE* f : {stdout, rep}) {
      if (!f) continue;
      std::fprintf(f, "%s %2d %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                   o.detail.c_str());
      std::fflush(f);
    }
  }
  if (rep) std::fclose(rep);
  return failed == 0 ? 0 : 1;
}

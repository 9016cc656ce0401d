// src/train.cc

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

#include "svgg/train.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "svgg/error.h"
#include "svgg/parallel.h"
#include "svgg/random.h"

namespace svgg {

void TrainConfig::validate() const {
  if (epochs < 1) throw UsageError("train.epochs must be >= 1");
  if (batch_size < 1) throw UsageError("train.batch_size must be >= 1");
  if (!(lr > 0.0)) throw UsageError("train.lr must be > 0");
  if (eval_every < 0) throw UsageError("train.eval_every must be >= 0");
  if (workers < 1) throw UsageError("workers must be >= 1");
  augment_policy.validate();
}

nlohmann::json TrainConfig::to_json() const {
  return {{"epochs", epochs},
          {"lr", lr},
          {"batch_size", batch_size},
          {"seed", seed},
          {"augment_enabled", augment_enabled},
          {"augment_in_finetune", augment_in_finetune},
          {"eval_every", eval_every}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j, TrainConfig c) {
  if (!j.is_object()) throw UsageError("train: expected an object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "epochs") c.epochs = value.get<int>();
      else if (key == "lr") c.lr = value.get<double>();
      else if (key == "batch_size") c.batch_size = value.get<int>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "augment_enabled") c.augment_enabled = value.get<bool>();
      else if (key == "augment_in_finetune") c.augment_in_finetune = value.get<bool>();
      else if (key == "eval_every") c.eval_every = value.get<int>();
      else throw UsageError("unknown config key 'train." + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string MetricsLog::to_csv() const {
  std::ostringstream os;
  os << "step,epoch,loss,train_acc,val_acc,seconds\n";
  auto cell = [&](double v) {
    if (!std::isnan(v)) os << v;
  };
  os.precision(9);
  for (const auto& s : steps) {
    os << s.step << ',' << s.epoch << ',' << s.loss << ',';
    cell(s.train_acc);
    os << ',';
    cell(s.val_acc);
    os << ',' << s.seconds << '\n';
  }
  return os.str();
}

void MetricsLog::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write metrics: " + path);
  out << to_csv();
}

SpectrogramSet prepare_spectrograms(const DatasetManifest& manifest, const StftConfig& stft_cfg,
                                    int workers) {
  SpectrogramSet set;
  set.specs.resize(manifest.size());
  set.labels.resize(manifest.size());
  std::map<std::string, std::vector<std::size_t>> by_audio;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    by_audio[manifest.entries[i].audio].push_back(i);
    set.labels[i] = manifest.entries[i].label;
  }
  std::vector<const std::pair<const std::string, std::vector<std::size_t>>*> groups;
  for (const auto& g : by_audio) groups.push_back(&g);
  parallel_for(groups.size(), workers, [&](std::size_t gi) {
    const AudioBuffer audio = load_wav(groups[gi]->first);
    for (std::size_t i : groups[gi]->second) {
      const auto& e = manifest.entries[i];
      set.specs[i] = log_magnitude(stft(extract_segment(audio, e.alignment), stft_cfg));
    }
  });
  return set;
}

void normalize_in_place(SpectrogramSet& set, const NormStats& stats) {
  for (auto& s : set.specs) s = normalize(s, stats);
}

NormStats manifest_norm_stats(const DatasetManifest& manifest, const StftConfig& stft_cfg,
                              int workers) {
  if (manifest.empty()) throw DataError("empty manifest");
  const SpectrogramSet set = prepare_spectrograms(manifest, stft_cfg, workers);
  return compute_norm_stats(set.specs);
}

namespace {

int argmax_row(const Tensor<float>& logits, std::size_t row) {
  const std::size_t k = logits.dim(1);
  const float* p = logits.data() + row * k;
  return static_cast<int>(std::max_element(p, p + k) - p);
}

Tensor<float> canvas_tensor(const Canvas& c) {
  Tensor<float> x({1, 1, std::size_t(c.rows()), std::size_t(c.cols())});
  std::memcpy(x.data(), c.data(), x.size() * sizeof(float));
  return x;
}

struct TrainingRun {
  SpeechVGG& model;
  const SpectrogramSet& train;
  const SpectrogramSet* val;
  const TrainConfig& cfg;
  bool augment;
  const StepCallback& on_step;
};

// Returns the best-validation (or final) parameters via `best`.
void run_training(const TrainingRun& run, Checkpoint& best, double& best_acc, MetricsLog& log) {
  SpeechVGG& model = run.model;
  const TrainConfig& cfg = run.cfg;
  AdamState adam;
  adam.lr = cfg.lr;
  Gradients<float> grads = model.make_gradients();

  std::vector<Param<float>> frozen_snapshot;
  if (cfg.verify_frozen) {
    for (std::size_t p = 0; p < model.params().size(); ++p)
      if (!model.trainable_mask()[p]) frozen_snapshot.push_back(model.params()[p]);
  }

  const auto t0 = std::chrono::steady_clock::now();
  const bool have_val = run.val && run.val->size() > 0;
  best_acc = std::numeric_limits<double>::quiet_NaN();
  std::int64_t step = 0;

  auto validate_now = [&](StepRecord& rec) {
    rec.val_acc = evaluate(model, *run.val).accuracy;
    if (std::isnan(best_acc) || rec.val_acc > best_acc) {
      best_acc = rec.val_acc;
      best.model = model;
    }
  };

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto batches = make_index_batches(run.train.size(), cfg.batch_size, cfg.seed, epoch);
    std::size_t correct = 0, seen = 0;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      const Batch& batch = batches[bi];
      grads.zero();
      double loss = 0.0;
      for (std::size_t idx : batch) {
        Rng pad_rng = make_rng(cfg.seed, {tag(SeedStream::kPad), std::uint64_t(epoch), idx});
        PaddedExample ex = pad_to_canvas(run.train.specs[idx], pad_rng);
        if (run.augment) {
          Rng aug_rng = make_rng(cfg.seed, {tag(SeedStream::kAugment), std::uint64_t(epoch), idx});
          ex.canvas = spec_augment(ex.canvas, cfg.augment_policy, aug_rng);
        }
        ForwardCache<float> cache;
        const Tensor<float> logits =
            model.forward_to(canvas_tensor(ex.canvas), model.logits_layer(), &cache);
        const int label = run.train.labels[idx];
        LossOutput<float> ce = softmax_cross_entropy(logits, std::span<const int>(&label, 1));
        const float scale = 1.0f / static_cast<float>(batch.size());
        for (auto& v : ce.grad.values()) v *= scale;
        const LayerGrad<float> seed{model.logits_layer(), std::move(ce.grad)};
        model.backward(cache, std::span<const LayerGrad<float>>(&seed, 1), &grads, false);
        loss += ce.loss;
        correct += argmax_row(logits, 0) == label;
        ++seen;
      }
      adam_step(std::span<Param<float>>(model.params()), grads, adam, &model.trainable_mask());
      ++step;

      if (cfg.verify_frozen) {
        for (const auto& snap : frozen_snapshot) {
          const auto& now = model.params()[model.param_index(snap.name)].value;
          if (std::memcmp(now.data(), snap.value.data(), now.size() * sizeof(float)) != 0)
            throw std::logic_error("frozen parameter '" + snap.name + "' changed at step " +
                                   std::to_string(step));
        }
      }

      StepRecord rec;
      rec.step = step;
      rec.epoch = epoch + 1;
      rec.loss = loss / static_cast<double>(batch.size());
      rec.train_acc = static_cast<double>(correct) / static_cast<double>(seen);
      const bool epoch_end = bi + 1 == batches.size();
      if (have_val && (epoch_end || (cfg.eval_every > 0 && step % cfg.eval_every == 0)))
        validate_now(rec);
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      log.steps.push_back(rec);
      if (run.on_step) run.on_step(rec);
    }
  }
  if (!have_val) best.model = model;
}

void check_manifest_labels(const DatasetManifest& m, int num_classes, const char* which) {
  for (const auto& e : m.entries)
    if (e.label >= num_classes)
      throw DataError(std::string(which) + " manifest class " + std::to_string(e.label) +
                      " exceeds the model's " + std::to_string(num_classes) + " classes");
}

}  // namespace

TrainResult train_word_classifier(const DatasetManifest& train, const DatasetManifest& val,
                                  const ModelConfig& model_config, const TrainConfig& config,
                                  const StepCallback& on_step) {
  config.validate();
  model_config.validate();
  if (train.empty()) throw DataError("empty manifest (train)");
  if (val.empty()) throw DataError("empty manifest (validation)");
  check_same_dictionary(train, val);
  check_manifest_labels(train, model_config.num_classes, "train");
  check_manifest_labels(val, model_config.num_classes, "validation");

  SpectrogramSet train_set = prepare_spectrograms(train, {}, config.workers);
  SpectrogramSet val_set = prepare_spectrograms(val, {}, config.workers);
  const NormStats stats = compute_norm_stats(train_set.specs);
  normalize_in_place(train_set, stats);
  normalize_in_place(val_set, stats);

  SpeechVGG model = SpeechVGG::build(model_config, config.seed);
  TrainResult result;
  result.best.stats = stats;
  result.best.dictionary_hash = manifest_dictionary_hash(train);
  const TrainingRun run{model, train_set, &val_set, config, config.augment_enabled, on_step};
  run_training(run, result.best, result.best_val_acc, result.log);
  result.best.metadata = {{"task", "word_classification"},
                          {"train", config.to_json()},
                          {"augment", config.augment_policy.to_json()},
                          {"steps", result.log.steps.size()},
                          {"best_val_acc", result.best_val_acc}};
  return result;
}

FineTuneMode parse_fine_tune_mode(const std::string& s) {
  if (s == "fresh") return FineTuneMode::kFresh;
  if (s == "frozen") return FineTuneMode::kFrozen;
  if (s == "finetune") return FineTuneMode::kFinetune;
  throw UsageError("unknown fine-tuning mode '" + s + "' (expected fresh, frozen or finetune)");
}

const char* fine_tune_mode_name(FineTuneMode mode) {
  switch (mode) {
    case FineTuneMode::kFresh: return "fresh";
    case FineTuneMode::kFrozen: return "frozen";
    case FineTuneMode::kFinetune: return "finetune";
  }
  return "?";
}

TrainResult fine_tune(const Checkpoint& base, FineTuneMode mode, const DatasetManifest& train,
                      const DatasetManifest& val, const TrainConfig& config,
                      const StepCallback& on_step) {
  config.validate();
  if (train.empty()) throw DataError("empty manifest (train)");
  const int classes = std::max(train.num_classes(), val.num_classes());
  if (classes < 2) throw DataError("fine-tuning needs at least two classes");

  SpeechVGG model = SpeechVGG::zeros(base.model.config());
  switch (mode) {
    case FineTuneMode::kFresh: {
      ModelConfig cfg = base.model.config();
      cfg.num_classes = classes;
      model = SpeechVGG::build(cfg, derive_seed(config.seed, {tag(SeedStream::kInit)}));
      break;
    }
    case FineTuneMode::kFrozen:
      model = base.model.swap_head(classes, config.seed);
      model.set_trainable(TrainableMode::kHeadOnly);
      break;
    case FineTuneMode::kFinetune:
      model = base.model.swap_head(classes, config.seed);
      model.set_trainable(TrainableMode::kAll);
      break;
  }

  SpectrogramSet train_set = prepare_spectrograms(train, {}, config.workers);
  SpectrogramSet val_set;
  if (!val.empty()) val_set = prepare_spectrograms(val, {}, config.workers);
  normalize_in_place(train_set, base.stats);
  normalize_in_place(val_set, base.stats);

  TrainResult result;
  result.best.stats = base.stats;
  result.best.dictionary_hash = manifest_dictionary_hash(train);
  const TrainingRun run{model, train_set, &val_set, config, config.augment_in_finetune, on_step};
  run_training(run, result.best, result.best_val_acc, result.log);
  result.best.metadata = {{"task", "fine_tune"},
                          {"mode", fine_tune_mode_name(mode)},
                          {"base_dictionary_hash", base.dictionary_hash},
                          {"train", config.to_json()},
                          {"steps", result.log.steps.size()},
                          {"best_val_acc", result.best_val_acc}};
  return result;
}

EvalResult evaluate(const SpeechVGG& model, const SpectrogramSet& normalized) {
  if (normalized.size() == 0) throw DataError("empty manifest");
  const int k = model.config().num_classes;
  EvalResult r;
  r.confusion.assign(k, std::vector<std::size_t>(k, 0));
  constexpr std::size_t kChunk = 16;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < normalized.size(); i += kChunk) {
    const std::size_t end = std::min(normalized.size(), i + kChunk);
    std::vector<Canvas> canvases;
    for (std::size_t j = i; j < end; ++j) {
      if (normalized.labels[j] < 0 || normalized.labels[j] >= k)
        throw DataError("evaluate: class " + std::to_string(normalized.labels[j]) +
                        " overflows the model's " + std::to_string(k) + " classes");
      canvases.push_back(center_on_canvas(normalized.specs[j]).canvas);
    }
    const Tensor<float> logits =
        model.forward_to(stack_canvases<float>(canvases), model.logits_layer());
    for (std::size_t j = i; j < end; ++j) {
      const int pred = argmax_row(logits, j - i);
      ++r.confusion[normalized.labels[j]][pred];
      correct += pred == normalized.labels[j];
    }
  }
  r.total = normalized.size();
  r.accuracy = static_cast<double>(correct) / static_cast<double>(r.total);
  return r;
}

EvalResult evaluate(const SpeechVGG& model, const NormStats& stats, const DatasetManifest& manifest,
                    int workers) {
  if (manifest.empty()) throw DataError("empty manifest");
  check_manifest_labels(manifest, model.config().num_classes, "evaluation");
  SpectrogramSet set = prepare_spectrograms(manifest, {}, workers);
  normalize_in_place(set, stats);
  return evaluate(model, set);
}

std::vector<std::string> changed_conv_params(const SpeechVGG& a, const SpeechVGG& b) {
  std::vector<std::string> changed;
  for (std::size_t p = 0; p < a.params().size(); ++p) {
    if (a.is_head_param(p)) continue;
    const auto& pa = a.params()[p];
    const int q = b.param_index(pa.name);
    if (q < 0 || b.params()[q].value.shape() != pa.value.shape() ||
        std::memcmp(b.params()[q].value.data(), pa.value.data(),
                    pa.value.size() * sizeof(float)) != 0)
      changed.push_back(pa.name);
  }
  return changed;
}

}  // namespace svgg

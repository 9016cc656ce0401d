// src/config.cc

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

#include "svgg/config.h"

#include <filesystem>
#include <fstream>

#include "svgg/error.h"

namespace svgg {
namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& section) {
  if (!j.is_object()) throw UsageError(section + ": expected an object");
}

template <typename Fn>
void parse_keys(const json& j, const std::string& section, Fn&& fn) {
  require_object(j, section);
  try {
    for (const auto& [key, value] : j.items())
      if (!fn(key, value)) throw UsageError("unknown config key '" + section + "." + key + "'");
  } catch (const json::exception& e) {
    throw UsageError(section + " config: " + e.what());
  }
}

}  // namespace

StftConfig stft_from_json(const json& j) {
  StftConfig c;
  parse_keys(j, "stft", [&](const std::string& key, const json& v) {
    if (key == "window_len") c.window_len = v.get<int>();
    else if (key == "hop") c.hop = v.get<int>();
    else if (key == "num_bins") c.num_bins = v.get<int>();
    else if (key == "window") {
      const auto name = v.get<std::string>();
      if (name == "hann") c.window = WindowFn::kHann;
      else if (name == "rectangular") c.window = WindowFn::kRectangular;
      else throw UsageError("stft.window: unknown window '" + name + "'");
    } else {
      return false;
    }
    return true;
  });
  c.validate();
  const StftConfig d;
  if (c.window_len != d.window_len || c.hop != d.hop || c.num_bins != d.num_bins ||
      c.window != d.window)
    throw UsageError("stft: the network front end is fixed at hann/256/128 with 128 bins");
  return c;
}

json stft_to_json(const StftConfig& c) {
  return {{"window_len", c.window_len},
          {"hop", c.hop},
          {"num_bins", c.num_bins},
          {"window", c.window == WindowFn::kHann ? "hann" : "rectangular"}};
}

DreamConfig dream_from_json(const json& j) {
  DreamConfig c;
  parse_keys(j, "dream", [&](const std::string& key, const json& v) {
    if (key == "layer") c.layer = v.is_number() ? std::to_string(v.get<int>()) : v.get<std::string>();
    else if (key == "steps") c.steps = v.get<int>();
    else if (key == "step_size") c.step_size = v.get<double>();
    else if (key == "seed") c.seed = v.get<std::uint64_t>();
    else if (key == "smoothing_sigma") c.smoothing_sigma = v.get<double>();
    else if (key == "smoothing_every") c.smoothing_every = v.get<int>();
    else return false;
    return true;
  });
  c.validate();
  return c;
}

json dream_to_json(const DreamConfig& c) {
  return {{"layer", c.layer},
          {"steps", c.steps},
          {"step_size", c.step_size},
          {"seed", c.seed},
          {"smoothing_sigma", c.smoothing_sigma},
          {"smoothing_every", c.smoothing_every}};
}

json CliConfig::to_json() const {
  return {{"seed", seed},
          {"dataset",
           {{"train_manifest", dataset.train_manifest},
            {"val_manifest", dataset.val_manifest},
            {"dictionary_size", dataset.dictionary_size},
            {"min_word_length", dataset.min_word_length}}},
          {"stft", stft_to_json(stft)},
          {"augment", augment.to_json()},
          {"model", model.to_json()},
          {"train", train.to_json()},
          {"features",
           {{"num_segments", features.num_segments},
            {"taps", features.taps},
            {"classifier",
             {{"l2", features.classifier.l2},
              {"iters", features.classifier.iters},
              {"lr", features.classifier.lr},
              {"seed", features.classifier.seed}}}}},
          {"dream", dream_to_json(dream)}};
}

CliConfig CliConfig::from_json(const json& j) {
  CliConfig c;
  require_object(j, "config");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw UsageError("seed: expected a non-negative integer");
    c.set_seed(j["seed"].get<std::uint64_t>());
  }
  for (const auto& [key, value] : j.items()) {
    if (key == "seed") continue;
    if (key == "dataset") {
      parse_keys(value, "dataset", [&](const std::string& k, const json& v) {
        if (k == "train_manifest") c.dataset.train_manifest = v.get<std::string>();
        else if (k == "val_manifest") c.dataset.val_manifest = v.get<std::string>();
        else if (k == "dictionary_size") c.dataset.dictionary_size = v.get<int>();
        else if (k == "min_word_length") c.dataset.min_word_length = v.get<int>();
        else return false;
        return true;
      });
      if (c.dataset.dictionary_size < 2 || c.dataset.min_word_length < 1)
        throw UsageError("dataset: dictionary_size must be >= 2 and min_word_length >= 1");
    } else if (key == "stft") {
      c.stft = stft_from_json(value);
    } else if (key == "augment") {
      c.augment = AugmentPolicy::from_json(value);
    } else if (key == "model") {
      c.model = ModelConfig::from_json(value);
    } else if (key == "train") {
      c.train = TrainConfig::from_json(value, c.train);
    } else if (key == "features") {
      parse_keys(value, "features", [&](const std::string& k, const json& v) {
        if (k == "num_segments") c.features.num_segments = v.get<int>();
        else if (k == "taps") c.features.taps = v.get<std::vector<int>>();
        else if (k == "classifier") {
          parse_keys(v, "features.classifier", [&](const std::string& ck, const json& cv) {
            if (ck == "l2") c.features.classifier.l2 = cv.get<double>();
            else if (ck == "iters") c.features.classifier.iters = cv.get<int>();
            else if (ck == "lr") c.features.classifier.lr = cv.get<double>();
            else if (ck == "seed") c.features.classifier.seed = cv.get<std::uint64_t>();
            else return false;
            return true;
          });
        } else {
          return false;
        }
        return true;
      });
      if (c.features.num_segments < 1) throw UsageError("features.num_segments must be >= 1");
      for (int t : c.features.taps)
        if (t < 1 || t > kNumBlocks) throw UsageError("features.taps: tap index out of range 1..5");
      if (c.features.classifier.iters < 0 || c.features.classifier.lr <= 0 ||
          c.features.classifier.l2 < 0)
        throw UsageError("features.classifier: invalid iters, lr or l2");
    } else if (key == "dream") {
      const std::uint64_t root = c.dream.seed;
      json d = value;
      if (d.is_object() && !d.contains("seed")) d["seed"] = root;
      c.dream = dream_from_json(d);
    } else {
      throw UsageError("unknown config key '" + key + "'");
    }
  }
  c.train.augment_policy = c.augment;
  return c;
}

CliConfig CliConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config " + path + ": " + e.what());
  }
  return from_json(j);
}

void CliConfig::set_seed(std::uint64_t s) {
  seed = s;
  train.seed = s;
  dream.seed = s;
  features.classifier.seed = s;
}

void CliConfig::write_resolved(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  std::ofstream out(std::filesystem::path(dir) / "resolved_config.json");
  if (!out) throw DataError("cannot write resolved_config.json in " + dir);
  out << to_json().dump(2) << '\n';
}

}  // namespace svgg

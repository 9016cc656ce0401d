// include/svgg/logreg.h

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

#ifndef SVGG_LOGREG_H_
#define SVGG_LOGREG_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace svgg {

// Multinomial logistic regression over fixed embeddings.
struct LogRegModel {
  int dim = 0;
  int classes = 0;
  std::vector<double> weights;  // classes x dim, row-major
  std::vector<double> bias;     // classes
  double l2 = 0.0;
  std::vector<std::string> label_names;  // optional, index = class

  nlohmann::json to_json() const;
  static LogRegModel from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static LogRegModel load(const std::string& path);
};

struct LogRegConfig {
  double l2 = 1e-4;
  int iters = 500;
  double lr = 0.1;
  std::uint64_t seed = 0;
};

struct FitReport {
  LogRegModel model;
  std::vector<double> loss_history;  // objective before each iteration, then final
  double final_lr = 0.0;
};

// Full-batch gradient descent on mean cross-entropy + (l2/2)||W||^2 from a
// zero start. A step that would raise the objective is retried with half the
// learning rate, so the history is non-increasing.
FitReport fit_logreg(std::span<const std::vector<double>> features, std::span<const int> labels,
                     const LogRegConfig& config = {});

std::vector<double> predict(const LogRegModel& model, std::span<const double> embedding);

struct ClassifierEval {
  double accuracy = 0.0;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
};

ClassifierEval evaluate_logreg(const LogRegModel& model,
                               std::span<const std::vector<double>> features,
                               std::span<const int> labels);

double logreg_objective(const LogRegModel& model, std::span<const std::vector<double>> features,
                        std::span<const int> labels);

}  // namespace svgg

#endif  // SVGG_LOGREG_H_

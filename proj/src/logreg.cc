// src/logreg.cc

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

#include "svgg/logreg.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "svgg/error.h"

namespace svgg {

nlohmann::json LogRegModel::to_json() const {
  nlohmann::json j = {{"dim", dim}, {"classes", classes}, {"W", weights}, {"b", bias}, {"l2", l2}};
  if (!label_names.empty()) j["label_names"] = label_names;
  return j;
}

LogRegModel LogRegModel::from_json(const nlohmann::json& j) {
  LogRegModel m;
  try {
    m.dim = j.at("dim").get<int>();
    m.classes = j.at("classes").get<int>();
    m.weights = j.at("W").get<std::vector<double>>();
    m.bias = j.at("b").get<std::vector<double>>();
    m.l2 = j.at("l2").get<double>();
    if (j.contains("label_names")) m.label_names = j["label_names"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("logistic regression model: ") + e.what());
  }
  if (m.dim < 1 || m.classes < 2 || m.weights.size() != std::size_t(m.dim) * m.classes ||
      m.bias.size() != std::size_t(m.classes))
    throw DataError("logistic regression model: inconsistent dimensions");
  if (!m.label_names.empty() && m.label_names.size() != std::size_t(m.classes))
    throw DataError("logistic regression model: label_names length differs from classes");
  return m;
}

void LogRegModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << to_json().dump() << '\n';
}

LogRegModel LogRegModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  return from_json(j);
}

namespace {

void logits_into(const LogRegModel& m, std::span<const double> x, std::vector<double>& z) {
  z.assign(m.classes, 0.0);
  for (int c = 0; c < m.classes; ++c) {
    const double* w = m.weights.data() + std::size_t(c) * m.dim;
    double s = m.bias[c];
    for (int d = 0; d < m.dim; ++d) s += w[d] * x[d];
    z[c] = s;
  }
}

void softmax_in_place(std::vector<double>& z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (auto& v : z) sum += (v = std::exp(v - mx));
  for (auto& v : z) v /= sum;
}

void check_data(std::span<const std::vector<double>> x, std::span<const int> y, int dim) {
  if (x.size() != y.size()) throw DataError("logistic regression: features and labels differ in length");
  for (const auto& row : x)
    if (static_cast<int>(row.size()) != dim)
      throw DataError("logistic regression: embedding dimension mismatch");
}

}  // namespace

double logreg_objective(const LogRegModel& model, std::span<const std::vector<double>> features,
                        std::span<const int> labels) {
  check_data(features, labels, model.dim);
  double loss = 0.0;
  std::vector<double> z;
  for (std::size_t i = 0; i < features.size(); ++i) {
    logits_into(model, features[i], z);
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - mx);
    loss += std::log(sum) + mx - z[labels[i]];
  }
  loss /= static_cast<double>(features.size());
  double norm = 0.0;
  for (double w : model.weights) norm += w * w;
  return loss + 0.5 * model.l2 * norm;
}

FitReport fit_logreg(std::span<const std::vector<double>> features, std::span<const int> labels,
                     const LogRegConfig& config) {
  if (features.empty()) throw DataError("logistic regression: no training data");
  const int dim = static_cast<int>(features[0].size());
  if (dim < 1) throw DataError("logistic regression: empty embeddings");
  check_data(features, labels, dim);
  int classes = 0;
  for (int l : labels) {
    if (l < 0) throw DataError("logistic regression: negative label");
    classes = std::max(classes, l + 1);
  }
  std::vector<bool> present(classes, false);
  for (int l : labels) present[l] = true;
  if (std::count(present.begin(), present.end(), true) < 2)
    throw DataError("logistic regression: need at least two classes");

  FitReport rep;
  LogRegModel& m = rep.model;
  m.dim = dim;
  m.classes = classes;
  m.l2 = config.l2;
  m.weights.assign(std::size_t(dim) * classes, 0.0);
  m.bias.assign(classes, 0.0);

  const double n = static_cast<double>(features.size());
  double lr = config.lr;
  double current = logreg_objective(m, features, labels);
  std::vector<double> gw(m.weights.size()), gb(classes), z;
  for (int it = 0; it < config.iters; ++it) {
    rep.loss_history.push_back(current);
    std::fill(gw.begin(), gw.end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
    for (std::size_t i = 0; i < features.size(); ++i) {
      logits_into(m, features[i], z);
      softmax_in_place(z);
      z[labels[i]] -= 1.0;
      for (int c = 0; c < classes; ++c) {
        const double g = z[c] / n;
        gb[c] += g;
        double* row = gw.data() + std::size_t(c) * dim;
        for (int d = 0; d < dim; ++d) row[d] += g * features[i][d];
      }
    }
    for (std::size_t k = 0; k < gw.size(); ++k) gw[k] += m.l2 * m.weights[k];

    for (int attempt = 0; attempt < 60; ++attempt) {
      LogRegModel trial = m;
      for (std::size_t k = 0; k < gw.size(); ++k) trial.weights[k] -= lr * gw[k];
      for (int c = 0; c < classes; ++c) trial.bias[c] -= lr * gb[c];
      const double next = logreg_objective(trial, features, labels);
      if (next <= current) {
        m = std::move(trial);
        current = next;
        break;
      }
      lr *= 0.5;
    }
  }
  rep.loss_history.push_back(current);
  rep.final_lr = lr;
  return rep;
}

std::vector<double> predict(const LogRegModel& model, std::span<const double> embedding) {
  if (static_cast<int>(embedding.size()) != model.dim)
    throw DataError("predict: embedding has " + std::to_string(embedding.size()) +
                    " values, model expects " + std::to_string(model.dim));
  std::vector<double> z;
  logits_into(model, embedding, z);
  softmax_in_place(z);
  return z;
}

ClassifierEval evaluate_logreg(const LogRegModel& model,
                               std::span<const std::vector<double>> features,
                               std::span<const int> labels) {
  if (features.empty()) throw DataError("evaluate: empty set");
  check_data(features, labels, model.dim);
  ClassifierEval ev;
  ev.confusion.assign(model.classes, std::vector<std::size_t>(model.classes, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= model.classes)
      throw DataError("evaluate: label " + std::to_string(labels[i]) + " outside the model's classes");
    const auto p = predict(model, features[i]);
    const int pred = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
    ++ev.confusion[labels[i]][pred];
    correct += pred == labels[i];
  }
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(features.size());
  return ev;
}

}  // namespace svgg

// include/svgg/adam.h

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

#ifndef SVGG_ADAM_H_
#define SVGG_ADAM_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "svgg/tensor.h"

namespace svgg {

template <typename T>
struct Param {
  std::string name;
  Tensor<T> value;
};

// One gradient buffer per model parameter, same order as the parameters.
// Buffers for parameters that were not differentiated stay empty.
template <typename T>
struct Gradients {
  std::vector<Tensor<T>> grads;

  void zero() {
    for (auto& g : grads) g.fill(T(0));
  }
};

struct AdamState {
  double lr = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t t = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

// Bias-corrected ADAM. Parameters whose `trainable` flag is false (or whose
// gradient buffer is empty) are left untouched, moments included.
template <typename T>
void adam_step(std::span<Param<T>> params, const Gradients<T>& grads, AdamState& state,
               const std::vector<bool>* trainable = nullptr);

}  // namespace svgg

#endif  // SVGG_ADAM_H_

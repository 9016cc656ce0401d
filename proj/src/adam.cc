// src/adam.cc

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

#include "svgg/adam.h"

#include <cmath>

namespace svgg {

template <typename T>
void adam_step(std::span<Param<T>> params, const Gradients<T>& grads, AdamState& state,
               const std::vector<bool>* trainable) {
  if (grads.grads.size() != params.size())
    throw DataError("adam: " + std::to_string(grads.grads.size()) + " gradients for " +
                    std::to_string(params.size()) + " parameters");
  if (trainable && trainable->size() != params.size())
    throw DataError("adam: trainable mask size mismatch");
  if (state.m.empty()) {
    state.m.resize(params.size());
    state.v.resize(params.size());
  }
  if (state.m.size() != params.size()) throw DataError("adam: state does not match parameters");

  ++state.t;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (trainable && !(*trainable)[p]) continue;
    const Tensor<T>& g = grads.grads[p];
    if (g.empty()) continue;
    Tensor<T>& w = params[p].value;
    if (g.shape() != w.shape())
      throw DataError("adam: gradient shape " + shape_str(g.shape()) + " for parameter " +
                      params[p].name + " " + shape_str(w.shape()));
    auto& m = state.m[p];
    auto& v = state.v[p];
    if (m.empty()) {
      m.assign(w.size(), 0.0);
      v.assign(w.size(), 0.0);
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g[i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * gi;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * gi * gi;
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      w[i] = static_cast<T>(w[i] - state.lr * mhat / (std::sqrt(vhat) + state.eps));
    }
  }
}

template void adam_step(std::span<Param<float>>, const Gradients<float>&, AdamState&,
                        const std::vector<bool>*);
template void adam_step(std::span<Param<double>>, const Gradients<double>&, AdamState&,
                        const std::vector<bool>*);

}  // namespace svgg

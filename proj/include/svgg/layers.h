// include/svgg/layers.h

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

#ifndef SVGG_LAYERS_H_
#define SVGG_LAYERS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "svgg/tensor.h"

namespace svgg {

enum class LayerKind { kConv3x3, kMaxPool2x2, kReLU, kDense, kFlatten };

const char* layer_kind_name(LayerKind kind);

// One link of the network chain. Convolutions are 3x3, stride 1, zero
// padding 1; pooling is 2x2 with stride 2.
struct LayerSpec {
  LayerKind kind = LayerKind::kReLU;
  std::string name;
  std::size_t in = 0;   // channels (conv) or features (dense)
  std::size_t out = 0;
};

// x: B x C x H x W, weight: O x C x 3 x 3, bias: O  ->  B x O x H x W
template <typename T>
Tensor<T> conv3x3_forward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias);

// Parameter gradients are accumulated into dweight/dbias when non-null.
// Returns the input gradient, or an empty tensor when want_dx is false.
template <typename T>
Tensor<T> conv3x3_backward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& dy,
                           Tensor<T>* dweight, Tensor<T>* dbias, bool want_dx = true);

template <typename T>
struct PoolOutput {
  Tensor<T> y;
  std::vector<std::uint32_t> argmax;  // flat input index per output cell
};

// Ties go to the first maximal cell in row-major window order.
template <typename T>
PoolOutput<T> maxpool2x2_forward(const Tensor<T>& x);

template <typename T>
Tensor<T> maxpool2x2_backward(const Shape& x_shape, std::span<const std::uint32_t> argmax,
                              const Tensor<T>& dy);

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x);

// Uses the forward output: gradient passes where y > 0.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& y, const Tensor<T>& dy);

// x: B x D, weight: K x D, bias: K  ->  B x K
template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias);

template <typename T>
Tensor<T> dense_backward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& dy,
                         Tensor<T>* dweight, Tensor<T>* dbias, bool want_dx = true);

template <typename T>
struct LossOutput {
  double loss = 0.0;
  Tensor<T> grad;  // (softmax - onehot) / B
};

// Mean negative log-likelihood of `labels`, max-subtracted for stability.
template <typename T>
LossOutput<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> labels);

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits);

}  // namespace svgg

#endif  // SVGG_LAYERS_H_

// src/layers.cc

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

#include "svgg/layers.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include <Eigen/Core>

namespace svgg {

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? ", " : "") << s[i];
  os << ')';
  return os.str();
}

const char* layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv3x3: return "conv3x3";
    case LayerKind::kMaxPool2x2: return "maxpool2x2";
    case LayerKind::kReLU: return "relu";
    case LayerKind::kDense: return "dense";
    case LayerKind::kFlatten: return "flatten";
  }
  return "?";
}

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;

void require(bool ok, const std::string& what) {
  if (!ok) throw DataError(what);
}

// col rows are (c, ky, kx); columns are output pixels (y, x).
template <typename T>
void im2col(const T* img, std::size_t channels, std::size_t h, std::size_t w, T* col) {
  const std::size_t hw = h * w;
  for (std::size_t c = 0; c < channels; ++c) {
    const T* src = img + c * hw;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        T* dst = col + ((c * 3 + ky) * 3 + kx) * hw;
        for (std::size_t y = 0; y < h; ++y) {
          const long sy = static_cast<long>(y) + ky - 1;
          T* row = dst + y * w;
          if (sy < 0 || sy >= static_cast<long>(h)) {
            std::fill(row, row + w, T(0));
            continue;
          }
          const T* srow = src + sy * w;
          // x + kx - 1 in [0, w)
          if (kx == 0) {
            row[0] = T(0);
            std::memcpy(row + 1, srow, (w - 1) * sizeof(T));
          } else if (kx == 1) {
            std::memcpy(row, srow, w * sizeof(T));
          } else {
            std::memcpy(row, srow + 1, (w - 1) * sizeof(T));
            row[w - 1] = T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* col, std::size_t channels, std::size_t h, std::size_t w, T* img) {
  const std::size_t hw = h * w;
  for (std::size_t c = 0; c < channels; ++c) {
    T* dst = img + c * hw;
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const T* src = col + ((c * 3 + ky) * 3 + kx) * hw;
        for (std::size_t y = 0; y < h; ++y) {
          const long sy = static_cast<long>(y) + ky - 1;
          if (sy < 0 || sy >= static_cast<long>(h)) continue;
          const T* row = src + y * w;
          T* drow = dst + sy * w;
          const long shift = kx - 1;
          const std::size_t x0 = shift < 0 ? 1 : 0;
          const std::size_t x1 = shift > 0 ? w - 1 : w;
          for (std::size_t x = x0; x < x1; ++x) drow[x + shift] += row[x];
        }
      }
    }
  }
}

void check_conv_shapes(const Shape& xs, const Shape& ws, const Shape& bs) {
  require(xs.size() == 4, "conv3x3: input must be B x C x H x W, got " + shape_str(xs));
  require(ws.size() == 4 && ws[2] == 3 && ws[3] == 3 && ws[1] == xs[1],
          "conv3x3: weight " + shape_str(ws) + " incompatible with input " + shape_str(xs));
  require(bs.size() == 1 && bs[0] == ws[0],
          "conv3x3: bias " + shape_str(bs) + " incompatible with weight " + shape_str(ws));
}

}  // namespace

template <typename T>
Tensor<T> conv3x3_forward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
  check_conv_shapes(x.shape(), weight.shape(), bias.shape());
  const std::size_t batch = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t o = weight.dim(0), hw = h * w;
  Tensor<T> y({batch, o, h, w});
  AlignedVector<T> col(c * 9 * hw);
  ConstMapMat<T> wm(weight.data(), o, c * 9);
  Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bv(bias.data(), o);
  for (std::size_t b = 0; b < batch; ++b) {
    im2col(x.data() + b * c * hw, c, h, w, col.data());
    MapMat<T> ym(y.data() + b * o * hw, o, hw);
    ym.noalias() = wm * ConstMapMat<T>(col.data(), c * 9, hw);
    ym.colwise() += bv;
  }
  return y;
}

template <typename T>
Tensor<T> conv3x3_backward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& dy,
                           Tensor<T>* dweight, Tensor<T>* dbias, bool want_dx) {
  check_conv_shapes(x.shape(), weight.shape(), Shape{weight.dim(0)});
  const std::size_t batch = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t o = weight.dim(0), hw = h * w;
  require(dy.shape() == Shape({batch, o, h, w}),
          "conv3x3 backward: upstream gradient shape " + shape_str(dy.shape()));
  if (dweight) require(dweight->shape() == weight.shape(), "conv3x3 backward: dweight shape");
  if (dbias) require(dbias->shape() == Shape{o}, "conv3x3 backward: dbias shape");

  Tensor<T> dx;
  if (want_dx) dx = Tensor<T>(x.shape());
  AlignedVector<T> col(c * 9 * hw);
  ConstMapMat<T> wm(weight.data(), o, c * 9);
  for (std::size_t b = 0; b < batch; ++b) {
    ConstMapMat<T> dym(dy.data() + b * o * hw, o, hw);
    if (dweight) {
      im2col(x.data() + b * c * hw, c, h, w, col.data());
      MapMat<T>(dweight->data(), o, c * 9).noalias() +=
          dym * ConstMapMat<T>(col.data(), c * 9, hw).transpose();
    }
    if (dbias) {
      Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>(dbias->data(), o) += dym.rowwise().sum();
    }
    if (want_dx) {
      MapMat<T> colm(col.data(), c * 9, hw);
      colm.noalias() = wm.transpose() * dym;
      col2im_add(col.data(), c, h, w, dx.data() + b * c * hw);
    }
  }
  return dx;
}

template <typename T>
PoolOutput<T> maxpool2x2_forward(const Tensor<T>& x) {
  require(x.rank() == 4, "maxpool2x2: input must be B x C x H x W, got " + shape_str(x.shape()));
  const std::size_t batch = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  require(h % 2 == 0 && w % 2 == 0,
          "maxpool2x2: spatial dims must be even, got " + shape_str(x.shape()));
  require(x.size() <= std::numeric_limits<std::uint32_t>::max(), "maxpool2x2: input too large");
  const std::size_t oh = h / 2, ow = w / 2;
  PoolOutput<T> out{Tensor<T>({batch, c, oh, ow}), {}};
  out.argmax.resize(out.y.size());
  std::size_t k = 0;
  for (std::size_t plane = 0; plane < batch * c; ++plane) {
    const std::size_t base = plane * h * w;
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t xq = 0; xq < ow; ++xq, ++k) {
        const std::size_t i0 = base + (2 * y) * w + 2 * xq;
        const std::size_t cand[4] = {i0, i0 + 1, i0 + w, i0 + w + 1};
        std::size_t best = cand[0];
        for (int j = 1; j < 4; ++j)
          if (x[cand[j]] > x[best]) best = cand[j];
        out.y[k] = x[best];
        out.argmax[k] = static_cast<std::uint32_t>(best);
      }
    }
  }
  return out;
}

template <typename T>
Tensor<T> maxpool2x2_backward(const Shape& x_shape, std::span<const std::uint32_t> argmax,
                              const Tensor<T>& dy) {
  require(argmax.size() == dy.size(), "maxpool2x2 backward: argmax record does not match gradient");
  Tensor<T> dx(x_shape);
  for (std::size_t k = 0; k < dy.size(); ++k) dx[argmax[k]] += dy[k];
  return dx;
}

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x) {
  Tensor<T> y = x;
  for (auto& v : y.values()) v = v > T(0) ? v : T(0);
  return y;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& y, const Tensor<T>& dy) {
  require(y.shape() == dy.shape(), "relu backward: shape mismatch");
  Tensor<T> dx(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] = y[i] > T(0) ? dy[i] : T(0);
  return dx;
}

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias) {
  require(x.rank() == 2, "dense: input must be B x D, got " + shape_str(x.shape()));
  require(weight.rank() == 2 && weight.dim(1) == x.dim(1),
          "dense: weight " + shape_str(weight.shape()) + " incompatible with input " +
              shape_str(x.shape()));
  require(bias.shape() == Shape{weight.dim(0)}, "dense: bias " + shape_str(bias.shape()));
  const std::size_t batch = x.dim(0), d = x.dim(1), k = weight.dim(0);
  Tensor<T> y({batch, k});
  MapMat<T> ym(y.data(), batch, k);
  ym.noalias() = ConstMapMat<T>(x.data(), batch, d) * ConstMapMat<T>(weight.data(), k, d).transpose();
  ym.rowwise() += Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(bias.data(), k);
  return y;
}

template <typename T>
Tensor<T> dense_backward(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& dy,
                         Tensor<T>* dweight, Tensor<T>* dbias, bool want_dx) {
  const std::size_t batch = x.dim(0), d = x.dim(1), k = weight.dim(0);
  require(dy.shape() == Shape({batch, k}), "dense backward: upstream gradient shape " +
                                               shape_str(dy.shape()));
  ConstMapMat<T> dym(dy.data(), batch, k);
  if (dweight)
    MapMat<T>(dweight->data(), k, d).noalias() += dym.transpose() * ConstMapMat<T>(x.data(), batch, d);
  if (dbias)
    Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(dbias->data(), k) += dym.colwise().sum();
  Tensor<T> dx;
  if (want_dx) {
    dx = Tensor<T>(x.shape());
    MapMat<T>(dx.data(), batch, d).noalias() = dym * ConstMapMat<T>(weight.data(), k, d);
  }
  return dx;
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& logits) {
  require(logits.rank() == 2, "softmax: logits must be B x K");
  const std::size_t batch = logits.dim(0), k = logits.dim(1);
  Tensor<T> p(logits.shape());
  for (std::size_t b = 0; b < batch; ++b) {
    const T* row = logits.data() + b * k;
    const double mx = *std::max_element(row, row + k);
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) z += std::exp(double(row[j]) - mx);
    for (std::size_t j = 0; j < k; ++j) p[b * k + j] = static_cast<T>(std::exp(double(row[j]) - mx) / z);
  }
  return p;
}

template <typename T>
LossOutput<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> labels) {
  require(logits.rank() == 2, "cross entropy: logits must be B x K");
  const std::size_t batch = logits.dim(0), k = logits.dim(1);
  require(labels.size() == batch, "cross entropy: label count does not match batch");
  LossOutput<T> out{0.0, Tensor<T>(logits.shape())};
  for (std::size_t b = 0; b < batch; ++b) {
    if (labels[b] < 0 || static_cast<std::size_t>(labels[b]) >= k)
      throw DataError("cross entropy: label " + std::to_string(labels[b]) + " out of range [0, " +
                      std::to_string(k) + ")");
    const T* row = logits.data() + b * k;
    const double mx = *std::max_element(row, row + k);
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) z += std::exp(double(row[j]) - mx);
    const double log_z = std::log(z) + mx;
    out.loss += log_z - double(row[labels[b]]);
    for (std::size_t j = 0; j < k; ++j) {
      const double p = std::exp(double(row[j]) - log_z);
      out.grad[b * k + j] = static_cast<T>((p - (j == std::size_t(labels[b]) ? 1.0 : 0.0)) / batch);
    }
  }
  out.loss /= static_cast<double>(batch);
  return out;
}

#define SVGG_INSTANTIATE_LAYERS(T)                                                            \
  template Tensor<T> conv3x3_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);   \
  template Tensor<T> conv3x3_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,   \
                                      Tensor<T>*, Tensor<T>*, bool);                          \
  template PoolOutput<T> maxpool2x2_forward(const Tensor<T>&);                                \
  template Tensor<T> maxpool2x2_backward(const Shape&, std::span<const std::uint32_t>,        \
                                         const Tensor<T>&);                                   \
  template Tensor<T> relu_forward(const Tensor<T>&);                                          \
  template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);                       \
  template Tensor<T> dense_forward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);     \
  template Tensor<T> dense_backward(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,     \
                                    Tensor<T>*, Tensor<T>*, bool);                            \
  template LossOutput<T> softmax_cross_entropy(const Tensor<T>&, std::span<const int>);       \
  template Tensor<T> softmax(const Tensor<T>&);

SVGG_INSTANTIATE_LAYERS(float)
SVGG_INSTANTIATE_LAYERS(double)

}  // namespace svgg

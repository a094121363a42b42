// Copyright 2026 The RLNAS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rlnas/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "rlnas/errors.hpp"

namespace rlnas::nn {

namespace {

void require_4d(const Tensor& x, const char* what) {
  if (x.ndim() != 4)
    throw ContractViolation(fmt::format("{} expects a 4-d tensor, got {}", what, shape_str(x.shape())));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape())
    throw ContractViolation(fmt::format("{}: shape mismatch {} vs {}", what, shape_str(a.shape()),
                                        shape_str(b.shape())));
}

Tensor to_tensor(const Shape& shape, const std::vector<double>& acc) {
  Tensor t(shape);
  for (std::size_t i = 0; i < acc.size(); ++i) t[i] = static_cast<float>(acc[i]);
  return t;
}

}  // namespace

void TrainHyper::validate() const {
  if (!(lr_min > 0.0) || !(lr_max >= lr_min))
    throw ContractViolation("learning rates must satisfy lr_max >= lr_min > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ContractViolation("momentum must be in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ContractViolation("weight_decay must be >= 0");
  if (epochs < 0) throw ContractViolation("epochs must be >= 0");
  if (batch_size < 1) throw ContractViolation("batch_size must be >= 1");
}

Tensor conv2d(const Tensor& x, const Tensor& w) {
  require_4d(x, "conv2d input");
  require_4d(w, "conv2d kernel");
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int O = w.dim(0), K = w.dim(2);
  if (w.dim(1) != C || w.dim(3) != K || K % 2 == 0)
    throw ContractViolation(fmt::format("conv2d: kernel {} incompatible with input {}",
                                        shape_str(w.shape()), shape_str(x.shape())));
  const int p = K / 2;
  Tensor y({B, O, H, W});
  for (int b = 0; b < B; ++b)
    for (int o = 0; o < O; ++o)
      for (int h = 0; h < H; ++h)
        for (int ww = 0; ww < W; ++ww) {
          double acc = 0.0;
          for (int c = 0; c < C; ++c)
            for (int kh = 0; kh < K; ++kh) {
              const int ih = h + kh - p;
              if (ih < 0 || ih >= H) continue;
              for (int kw = 0; kw < K; ++kw) {
                const int iw = ww + kw - p;
                if (iw < 0 || iw >= W) continue;
                acc += static_cast<double>(x.at(b, c, ih, iw)) * w.at(o, c, kh, kw);
              }
            }
          y.at(b, o, h, ww) = static_cast<float>(acc);
        }
  return y;
}

Tensor conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& dy, Tensor& dw) {
  require_4d(dy, "conv2d_backward grad");
  require_same_shape(w, dw, "conv2d_backward kernel grad");
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  const int O = w.dim(0), K = w.dim(2);
  if (dy.shape() != Shape{B, O, H, W}) throw ContractViolation("conv2d_backward: bad grad shape");
  const int p = K / 2;
  std::vector<double> dx(x.size(), 0.0);
  std::vector<double> dk(w.size(), 0.0);
  const auto xi = [&](int b, int c, int h, int ww) {
    return ((static_cast<std::size_t>(b) * C + c) * H + h) * W + ww;
  };
  const auto ki = [&](int o, int c, int kh, int kw) {
    return ((static_cast<std::size_t>(o) * C + c) * K + kh) * K + kw;
  };
  for (int b = 0; b < B; ++b)
    for (int o = 0; o < O; ++o)
      for (int h = 0; h < H; ++h)
        for (int ww = 0; ww < W; ++ww) {
          const double g = dy.at(b, o, h, ww);
          if (g == 0.0) continue;
          for (int c = 0; c < C; ++c)
            for (int kh = 0; kh < K; ++kh) {
              const int ih = h + kh - p;
              if (ih < 0 || ih >= H) continue;
              for (int kw = 0; kw < K; ++kw) {
                const int iw = ww + kw - p;
                if (iw < 0 || iw >= W) continue;
                dk[ki(o, c, kh, kw)] += g * x.at(b, c, ih, iw);
                dx[xi(b, c, ih, iw)] += g * w.at(o, c, kh, kw);
              }
            }
        }
  for (std::size_t i = 0; i < dk.size(); ++i) dw[i] += static_cast<float>(dk[i]);
  return to_tensor(x.shape(), dx);
}

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.data()) v = v > 0.0f ? v : 0.0f;
  return y;
}

Tensor relu_backward(const Tensor& y, const Tensor& dy) {
  require_same_shape(y, dy, "relu_backward");
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i)
    if (!(y[i] > 0.0f)) dx[i] = 0.0f;
  return dx;
}

Tensor avg_pool(const Tensor& x, int k) {
  require_4d(x, "avg_pool");
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3), p = k / 2;
  Tensor y(x.shape());
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < C; ++c)
      for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w) {
          double acc = 0.0;
          int count = 0;
          for (int ih = std::max(0, h - p); ih <= std::min(H - 1, h + p); ++ih)
            for (int iw = std::max(0, w - p); iw <= std::min(W - 1, w + p); ++iw) {
              acc += x.at(b, c, ih, iw);
              ++count;
            }
          y.at(b, c, h, w) = static_cast<float>(acc / count);
        }
  return y;
}

Tensor avg_pool_backward(const Tensor& x, int k, const Tensor& dy) {
  require_same_shape(x, dy, "avg_pool_backward");
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3), p = k / 2;
  std::vector<double> dx(x.size(), 0.0);
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < C; ++c)
      for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w) {
          const int h0 = std::max(0, h - p), h1 = std::min(H - 1, h + p);
          const int w0 = std::max(0, w - p), w1 = std::min(W - 1, w + p);
          const double g = dy.at(b, c, h, w) / static_cast<double>((h1 - h0 + 1) * (w1 - w0 + 1));
          for (int ih = h0; ih <= h1; ++ih)
            for (int iw = w0; iw <= w1; ++iw)
              dx[((static_cast<std::size_t>(b) * C + c) * H + ih) * W + iw] += g;
        }
  return to_tensor(x.shape(), dx);
}

Tensor max_pool(const Tensor& x, int k) {
  require_4d(x, "max_pool");
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3), p = k / 2;
  Tensor y(x.shape());
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < C; ++c)
      for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w) {
          float best = x.at(b, c, std::max(0, h - p), std::max(0, w - p));
          for (int ih = std::max(0, h - p); ih <= std::min(H - 1, h + p); ++ih)
            for (int iw = std::max(0, w - p); iw <= std::min(W - 1, w + p); ++iw)
              best = std::max(best, x.at(b, c, ih, iw));
          y.at(b, c, h, w) = best;
        }
  return y;
}

Tensor max_pool_backward(const Tensor& x, int k, const Tensor& dy) {
  require_same_shape(x, dy, "max_pool_backward");
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3), p = k / 2;
  Tensor dx(x.shape());
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < C; ++c)
      for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w) {
          // First maximum in scan order receives the gradient.
          int bh = std::max(0, h - p), bw = std::max(0, w - p);
          for (int ih = std::max(0, h - p); ih <= std::min(H - 1, h + p); ++ih)
            for (int iw = std::max(0, w - p); iw <= std::min(W - 1, w + p); ++iw)
              if (x.at(b, c, ih, iw) > x.at(b, c, bh, bw)) {
                bh = ih;
                bw = iw;
              }
          dx.at(b, c, bh, bw) += dy.at(b, c, h, w);
        }
  return dx;
}

Tensor downsample2x2(const Tensor& x) {
  require_4d(x, "downsample2x2");
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  if (H % 2 || W % 2) throw ContractViolation("downsample2x2 needs even spatial dims");
  Tensor y({B, C, H / 2, W / 2});
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < C; ++c)
      for (int h = 0; h < H / 2; ++h)
        for (int w = 0; w < W / 2; ++w) {
          const double s = static_cast<double>(x.at(b, c, 2 * h, 2 * w)) + x.at(b, c, 2 * h, 2 * w + 1) +
                           x.at(b, c, 2 * h + 1, 2 * w) + x.at(b, c, 2 * h + 1, 2 * w + 1);
          y.at(b, c, h, w) = static_cast<float>(s / 4.0);
        }
  return y;
}

Tensor downsample2x2_backward(const Tensor& dy) {
  require_4d(dy, "downsample2x2_backward");
  const int B = dy.dim(0), C = dy.dim(1), H = dy.dim(2), W = dy.dim(3);
  Tensor dx({B, C, 2 * H, 2 * W});
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < C; ++c)
      for (int h = 0; h < 2 * H; ++h)
        for (int w = 0; w < 2 * W; ++w) dx.at(b, c, h, w) = dy.at(b, c, h / 2, w / 2) * 0.25f;
  return dx;
}

Tensor global_avg_pool(const Tensor& x) {
  require_4d(x, "global_avg_pool");
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  Tensor y({B, C});
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < C; ++c) {
      double acc = 0.0;
      for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w) acc += x.at(b, c, h, w);
      y[static_cast<std::size_t>(b) * C + c] = static_cast<float>(acc / (H * W));
    }
  return y;
}

Tensor global_avg_pool_backward(const Tensor& dy, int h, int w) {
  const int B = dy.dim(0), C = dy.dim(1);
  Tensor dx({B, C, h, w});
  const float scale = 1.0f / static_cast<float>(h * w);
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < C; ++c) {
      const float g = dy[static_cast<std::size_t>(b) * C + c] * scale;
      for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) dx.at(b, c, i, j) = g;
    }
  return dx;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  if (x.ndim() != 2 || w.ndim() != 2 || b.ndim() != 1 || w.dim(1) != x.dim(1) ||
      b.dim(0) != w.dim(0))
    throw ContractViolation(fmt::format("linear: shapes {} {} {}", shape_str(x.shape()),
                                        shape_str(w.shape()), shape_str(b.shape())));
  const int B = x.dim(0), F = x.dim(1), O = w.dim(0);
  Tensor y({B, O});
  for (int i = 0; i < B; ++i)
    for (int o = 0; o < O; ++o) {
      double acc = b[o];
      for (int f = 0; f < F; ++f)
        acc += static_cast<double>(x[static_cast<std::size_t>(i) * F + f]) * w[static_cast<std::size_t>(o) * F + f];
      y[static_cast<std::size_t>(i) * O + o] = static_cast<float>(acc);
    }
  return y;
}

Tensor linear_backward(const Tensor& x, const Tensor& w, const Tensor& dy, Tensor& dw,
                       Tensor& db) {
  require_same_shape(w, dw, "linear_backward weight grad");
  const int B = x.dim(0), F = x.dim(1), O = w.dim(0);
  if (dy.shape() != Shape{B, O}) throw ContractViolation("linear_backward: bad grad shape");
  Tensor dx({B, F});
  for (int i = 0; i < B; ++i)
    for (int f = 0; f < F; ++f) {
      double acc = 0.0;
      for (int o = 0; o < O; ++o)
        acc += static_cast<double>(dy[static_cast<std::size_t>(i) * O + o]) * w[static_cast<std::size_t>(o) * F + f];
      dx[static_cast<std::size_t>(i) * F + f] = static_cast<float>(acc);
    }
  for (int o = 0; o < O; ++o) {
    double gb = 0.0;
    for (int i = 0; i < B; ++i) gb += dy[static_cast<std::size_t>(i) * O + o];
    db[o] += static_cast<float>(gb);
    for (int f = 0; f < F; ++f) {
      double acc = 0.0;
      for (int i = 0; i < B; ++i)
        acc += static_cast<double>(dy[static_cast<std::size_t>(i) * O + o]) * x[static_cast<std::size_t>(i) * F + f];
      dw[static_cast<std::size_t>(o) * F + f] += static_cast<float>(acc);
    }
  }
  return dx;
}

namespace {

void check_labels(const Tensor& logits, std::span<const int> labels) {
  if (logits.ndim() != 2 || static_cast<std::size_t>(logits.dim(0)) != labels.size())
    throw ContractViolation("cross_entropy: logits must be [B,C] with B labels");
  const int C = logits.dim(1);
  for (int y : labels)
    if (y < 0 || y >= C)
      throw LabelError(fmt::format("label {} outside [0, {}): label source has more categories "
                                   "than the classifier",
                                   y, C));
}

}  // namespace

double cross_entropy(const Tensor& logits, std::span<const int> labels) {
  check_labels(logits, labels);
  const int B = logits.dim(0), C = logits.dim(1);
  double total = 0.0;
  for (int i = 0; i < B; ++i) {
    const float* row = logits.ptr() + static_cast<std::size_t>(i) * C;
    const double m = *std::max_element(row, row + C);
    double s = 0.0;
    for (int c = 0; c < C; ++c) s += std::exp(row[c] - m);
    total += std::log(s) + m - row[labels[i]];
  }
  return total / B;
}

Tensor cross_entropy_backward(const Tensor& logits, std::span<const int> labels) {
  check_labels(logits, labels);
  const int B = logits.dim(0), C = logits.dim(1);
  Tensor g(logits.shape());
  for (int i = 0; i < B; ++i) {
    const float* row = logits.ptr() + static_cast<std::size_t>(i) * C;
    const double m = *std::max_element(row, row + C);
    double s = 0.0;
    for (int c = 0; c < C; ++c) s += std::exp(row[c] - m);
    for (int c = 0; c < C; ++c) {
      double p = std::exp(row[c] - m) / s;
      if (c == labels[i]) p -= 1.0;
      g[static_cast<std::size_t>(i) * C + c] = static_cast<float>(p / B);
    }
  }
  return g;
}

Tensor forward(const OpKind& op, const Tensor* params, const Tensor& input) {
  require_4d(input, "forward");
  switch (op.type) {
    case OpType::kNone:
      return Tensor(input.shape());
    case OpType::kSkip:
      return input;
    case OpType::kAvgPool:
      return avg_pool(input, op.kernel);
    case OpType::kMaxPool:
      return max_pool(input, op.kernel);
    case OpType::kConv:
      if (params == nullptr) throw ContractViolation("conv forward without a kernel");
      if (params->ndim() != 4 || params->dim(2) != op.kernel)
        throw ContractViolation(fmt::format("kernel {} does not match {}",
                                            shape_str(params->shape()), op.name()));
      return relu(conv2d(input, *params));
  }
  throw ContractViolation("unknown op");
}

void sgd_step(Tensor& param, const Tensor& grad, Tensor& velocity, double lr, double momentum,
              double weight_decay) {
  require_same_shape(param, grad, "sgd_step grad");
  require_same_shape(param, velocity, "sgd_step velocity");
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double v = momentum * velocity[i] + grad[i] + weight_decay * param[i];
    velocity[i] = static_cast<float>(v);
    param[i] = static_cast<float>(param[i] - lr * v);
  }
}

double cosine_lr(long t, long total, double lr_max, double lr_min) {
  if (total <= 0 || t < 0 || t > total)
    throw ContractViolation(fmt::format("cosine_lr: need 0 <= t <= T, T > 0 (t={}, T={})", t, total));
  // Convex-combination form keeps both endpoints exact.
  const double w = 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(t) /
                                         static_cast<double>(total)));
  return w * lr_max + (1.0 - w) * lr_min;
}

}  // namespace rlnas::nn

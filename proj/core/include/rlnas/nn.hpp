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

#ifndef RLNAS_NN_HPP
#define RLNAS_NN_HPP

/*
 * Minimal CPU kernels for training toy SuperNets.
 *
 * Activations are NCHW, conv kernels OIKK. Everything is stride 1 with
 * same-padding except the fixed 2x2 downsampling pool. Dot products
 * accumulate in double and are stored as float. No batch norm.
 */

#include <span>
#include <vector>

#include "rlnas/search_space.hpp"
#include "rlnas/tensor.hpp"

namespace rlnas::nn {

struct TrainHyper {
  double lr_max = 0.025;
  double lr_min = 0.001;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  int epochs = 250;
  int batch_size = 64;

  void validate() const;  // throws ContractViolation
};

// Plain convolution, no activation.
Tensor conv2d(const Tensor& x, const Tensor& w);
// Returns dx; accumulates the kernel gradient into dw (same shape as w).
Tensor conv2d_backward(const Tensor& x, const Tensor& w, const Tensor& dy, Tensor& dw);

Tensor relu(const Tensor& x);
// dy masked by y > 0, where y is the relu output.
Tensor relu_backward(const Tensor& y, const Tensor& dy);

// Averages over the in-bounds part of the window (padding excluded), so a
// constant map stays constant everywhere.
Tensor avg_pool(const Tensor& x, int k);
Tensor avg_pool_backward(const Tensor& x, int k, const Tensor& dy);

Tensor max_pool(const Tensor& x, int k);
Tensor max_pool_backward(const Tensor& x, int k, const Tensor& dy);

// Fixed 2x2 stride-2 average pool between cell stages. H and W must be even.
Tensor downsample2x2(const Tensor& x);
Tensor downsample2x2_backward(const Tensor& dy);

// [B,C,H,W] -> [B,C]
Tensor global_avg_pool(const Tensor& x);
Tensor global_avg_pool_backward(const Tensor& dy, int h, int w);

// x[B,F] * w[O,F]^T + b[O]
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);
// Returns dx; accumulates into dw and db.
Tensor linear_backward(const Tensor& x, const Tensor& w, const Tensor& dy, Tensor& dw,
                       Tensor& db);

// Mean over the batch of -log softmax(logits)[label]. Throws LabelError when
// a label is outside [0, C).
double cross_entropy(const Tensor& logits, std::span<const int> labels);
// Gradient of cross_entropy w.r.t. the logits.
Tensor cross_entropy_backward(const Tensor& logits, std::span<const int> labels);

// Applies one candidate op. Conv is followed by ReLU; none returns zeros.
// `params` is only read for conv.
Tensor forward(const OpKind& op, const Tensor* params, const Tensor& input);

// v <- momentum*v + grad + weight_decay*param; param <- param - lr*v.
void sgd_step(Tensor& param, const Tensor& grad, Tensor& velocity, double lr, double momentum,
              double weight_decay);

// lr_min + (lr_max - lr_min) * (1 + cos(pi * t / T)) / 2
double cosine_lr(long t, long total, double lr_max, double lr_min);

}  // namespace rlnas::nn

#endif  // RLNAS_NN_HPP

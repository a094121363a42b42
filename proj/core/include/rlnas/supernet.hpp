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

#ifndef RLNAS_SUPERNET_HPP
#define RLNAS_SUPERNET_HPP

/*
 * Weight-sharing SuperNet.
 *
 * Every (cell, edge, op) pair with learnable weights owns one OIKK kernel
 * named "cell{c}.edge{e}.op{o}.weight". Around the searchable cells sit a
 * 3x3 stem conv ("stem.weight"), 2x2-pool + 1x1 projections where the
 * channel count changes ("reduce{c}.weight"), and a global-average-pool +
 * linear classifier ("classifier.weight", "classifier.bias").
 *
 * All input nodes of a cell receive the previous cell's output. The cell
 * output is the sum of its output nodes. A training step samples one
 * encoding and updates only the parameters that encoding activates.
 */

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rlnas/dataset.hpp"
#include "rlnas/labels.hpp"
#include "rlnas/nn.hpp"
#include "rlnas/rng.hpp"
#include "rlnas/search_space.hpp"
#include "rlnas/tensor.hpp"

namespace rlnas {

inline constexpr std::uint32_t kSchemaVersion = 1;

struct WeightsMeta {
  std::uint64_t space_hash = 0;
  std::uint64_t seed = 0;
  std::uint32_t schema_version = kSchemaVersion;
  friend bool operator==(const WeightsMeta&, const WeightsMeta&) = default;
};

using TensorStore = std::map<std::string, Tensor>;

struct SuperNetWeights {
  TensorStore store;
  WeightsMeta meta;

  const Tensor& at(const std::string& name) const;  // throws ContractViolation
  bool same_keys(const SuperNetWeights& other) const;
};

std::string kernel_name(int cell, int edge, int op);

struct HeadConfig {
  int input_channels = 3;
  int num_classes = 10;  // classifier width
};

// He-uniform (+-sqrt(6/fan_in)) kernels, zero classifier bias. Each tensor
// draws from its own stream derived from (seed, name).
SuperNetWeights init_supernet(const SearchSpace& space, std::uint64_t seed,
                              const HeadConfig& head = {});

// Logits [B, num_classes] of the sub-network `encoding`.
Tensor forward_logits(const SearchSpace& space, const SuperNetWeights& weights,
                      const ArchEncoding& encoding, const Tensor& images);

double batch_loss(const SearchSpace& space, const SuperNetWeights& weights,
                  const ArchEncoding& encoding, const Tensor& images,
                  std::span<const int> labels);

// Piecewise-linear state of the forward pass: whether each ReLU is active and
// which input wins each max-pool window. The loss is smooth between two
// nearby weight settings with equal patterns.
std::vector<std::uint32_t> activation_pattern(const SearchSpace& space, const SuperNetWeights& weights,
                                              const ArchEncoding& encoding, const Tensor& images);

// Loss and gradients of every parameter the encoding activates; parameters
// off the active path are absent from `grads`. Gradients are of
// loss_scale * loss.
double loss_and_grads(const SearchSpace& space, const SuperNetWeights& weights,
                      const ArchEncoding& encoding, const Tensor& images,
                      std::span<const int> labels, TensorStore& grads, double loss_scale = 1.0);

// One SGD step on the active parameters only; momentum buffers of inactive
// parameters are untouched too. Returns the batch loss before the update.
double train_step(const SearchSpace& space, SuperNetWeights& weights, TensorStore& velocity,
                  const ArchEncoding& encoding, const Tensor& images,
                  std::span<const int> labels, double lr, const nn::TrainHyper& hyper);

struct EpochLog {
  double mean_loss = 0.0;
  double lr = 0.0;  // learning rate of the epoch's last step
};

struct Snapshot {
  SuperNetWeights initial;  // W0
  SuperNetWeights current;  // Wt
  std::vector<EpochLog> log;
};

// Observer called after every step with (global step, encoding, loss).
using StepObserver = std::function<void(long, const ArchEncoding&, double)>;

// Uniform single-path training. Throws TrainingDiverged on a non-finite loss.
Snapshot train_supernet(const SearchSpace& space, const SuperNetWeights& initial,
                        const Dataset& data, const LabelSource& labels,
                        const nn::TrainHyper& hyper, Rng& rng,
                        const StepObserver& observer = {});

// Fraction of samples whose first maximal logit equals the label.
double eval_val_acc(const SearchSpace& space, const ArchEncoding& encoding,
                    const SuperNetWeights& weights, const Dataset& val, int batch_size = 256);

}  // namespace rlnas

#endif  // RLNAS_SUPERNET_HPP

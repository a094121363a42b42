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

#ifndef RLNAS_ANGLE_HPP
#define RLNAS_ANGLE_HPP

/*
 * Angle-based convergence score.
 *
 * A candidate is represented by the concatenation, over every cell in stack
 * order and every input->output path in canonical order, of the flattened
 * tensors of the edges on that path. Edges shared by several paths appear
 * once per path. Ops without weights get fixed stand-ins:
 *
 *   avg/max pool K  ->  [O,C,K,K] filled with 1/K^2
 *   skip_connect    ->  nothing (SkipMode::kEmpty) or the [O,C,1,1]
 *                       identity (SkipMode::kIdentity)
 *   none            ->  removes every path through the edge
 *
 * The score is the angle between the vectors built from two weight stores,
 * normally W0 and Wt. Larger means faster convergence.
 */

#include <optional>
#include <string>
#include <vector>

#include "rlnas/search_space.hpp"
#include "rlnas/supernet.hpp"
#include "rlnas/tensor.hpp"

namespace rlnas {

enum class SkipMode { kEmpty, kIdentity };
enum class Comparison { kInitVsTrained, kInitVsInit };

// Empty skip for NAS-Bench-201-style spaces (single input, single output),
// identity skip for multi-input/multi-output cells.
SkipMode default_skip_mode(const SearchSpace& space);

// Stand-in tensor for `op`. std::nullopt marks an excluded op (none); an
// empty tensor (shape {0}) is a zero-length contribution. Conv returns a
// copy of `learned`, which must then be non-null.
// Throws ContractViolation for identity skip with in_ch != out_ch.
std::optional<Tensor> parameterize_op(const OpKind& op, int in_ch, int out_ch, SkipMode mode,
                                      const Tensor* learned = nullptr);

struct Segment {
  int cell = 0;
  int path = 0;  // index into the cell's enumerated paths
  int edge = 0;
  int op = 0;    // alternative index on that edge
  std::string tensor;  // store key, or "fixed:<op name>" for stand-ins
  std::size_t offset = 0;
  std::size_t length = 0;
};

struct WeightVector {
  std::vector<double> values;
  std::vector<Segment> layout;
};

// Throws EmptyWeightVector when the result would have no elements.
WeightVector build_weight_vector(const SearchSpace& space, const ArchEncoding& encoding,
                                 const SuperNetWeights& weights, SkipMode mode);

// Angle in [0, pi] between two equal-length vectors, 64-bit accumulation.
// Throws ZeroNormError if either vector has zero norm.
double vector_angle(std::span<const double> a, std::span<const double> b);

// Angle between V(encoding, from) and V(encoding, to).
double compute_angle(const SearchSpace& space, const ArchEncoding& encoding,
                     const SuperNetWeights& from, const SuperNetWeights& to, SkipMode mode);

// kInitVsTrained compares snapshot.initial with snapshot.current;
// kInitVsInit compares snapshot.initial with `other_initial`, which must
// have the same key set.
double compute_angle(const SearchSpace& space, const ArchEncoding& encoding,
                     const Snapshot& snapshot, SkipMode mode, Comparison comparison,
                     const SuperNetWeights* other_initial = nullptr);

}  // namespace rlnas

#endif  // RLNAS_ANGLE_HPP

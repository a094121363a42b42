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

#include "rlnas/angle.hpp"

#include <cmath>

#include <fmt/format.h>

#include "rlnas/errors.hpp"

namespace rlnas {

SkipMode default_skip_mode(const SearchSpace& space) {
  return space.cell.input_nodes.size() == 1 && space.cell.output_nodes.size() == 1
             ? SkipMode::kEmpty
             : SkipMode::kIdentity;
}

std::optional<Tensor> parameterize_op(const OpKind& op, int in_ch, int out_ch, SkipMode mode,
                                      const Tensor* learned) {
  switch (op.type) {
    case OpType::kNone:
      return std::nullopt;
    case OpType::kSkip: {
      if (mode == SkipMode::kEmpty) return Tensor(Shape{0});
      if (in_ch != out_ch)
        throw ContractViolation(fmt::format(
            "identity skip needs equal channels, got in={} out={}", in_ch, out_ch));
      Tensor t({out_ch, in_ch, 1, 1});
      for (int c = 0; c < out_ch; ++c) t.at(c, c, 0, 0) = 1.0f;
      return t;
    }
    case OpType::kAvgPool:
    case OpType::kMaxPool: {
      const int k = op.kernel;
      return Tensor({out_ch, in_ch, k, k}, 1.0f / static_cast<float>(k * k));
    }
    case OpType::kConv:
      if (learned == nullptr) throw ContractViolation("conv parameterization needs its kernel");
      return *learned;
  }
  return std::nullopt;
}

WeightVector build_weight_vector(const SearchSpace& space, const ArchEncoding& encoding,
                                 const SuperNetWeights& weights, SkipMode mode) {
  const auto paths = enumerate_paths(space, encoding);
  WeightVector v;
  for (int c = 0; c < space.stack_depth; ++c) {
    const int ch = space.channels[static_cast<std::size_t>(c)];
    // Stand-ins depend only on (edge, cell); build each once.
    std::vector<std::optional<Tensor>> per_edge(space.num_edges());
    std::vector<std::string> names(space.num_edges());
    for (std::size_t e = 0; e < space.num_edges(); ++e) {
      const OpKind& op = space.op(encoding, e);
      const Tensor* learned = nullptr;
      if (op.has_weights()) {
        names[e] = kernel_name(c, static_cast<int>(e), encoding[e]);
        learned = &weights.at(names[e]);
      } else {
        names[e] = "fixed:" + op.name();
      }
      per_edge[e] = parameterize_op(op, ch, ch, mode, learned);
    }
    for (std::size_t p = 0; p < paths.size(); ++p) {
      for (int e : paths[p]) {
        const auto& t = per_edge[static_cast<std::size_t>(e)];
        Segment seg{c, static_cast<int>(p), e, encoding[static_cast<std::size_t>(e)],
                    names[static_cast<std::size_t>(e)], v.values.size(), t->size()};
        const OpKind& op = space.op(encoding, static_cast<std::size_t>(e));
        if (op.is_pool())
          v.values.insert(v.values.end(), t->size(), 1.0 / (static_cast<double>(op.kernel) * op.kernel));
        else
          v.values.insert(v.values.end(), t->data().begin(), t->data().end());
        v.layout.push_back(std::move(seg));
      }
    }
  }
  if (v.values.empty())
    throw EmptyWeightVector(fmt::format("architecture {} has no weighted input->output path",
                                        encode_str(space, encoding)));
  return v;
}

double vector_angle(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw ContractViolation(fmt::format("weight vectors differ in length ({} vs {})", a.size(), b.size()));
  double aa = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (!(aa > 0.0) || !(bb > 0.0)) throw ZeroNormError("weight vector has zero norm");
  const double na = std::sqrt(aa);
  const double nb = std::sqrt(bb);
  // theta = 2 atan2(|u - v|, |u + v|) on the unit vectors: the same angle as
  // arccos of the clamped cosine, without its loss of precision near 0 and pi.
  double diff = 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double u = a[i] / na;
    const double w = b[i] / nb;
    diff += (u - w) * (u - w);
    sum += (u + w) * (u + w);
  }
  return 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));
}

double compute_angle(const SearchSpace& space, const ArchEncoding& encoding,
                     const SuperNetWeights& from, const SuperNetWeights& to, SkipMode mode) {
  const auto a = build_weight_vector(space, encoding, from, mode);
  const auto b = build_weight_vector(space, encoding, to, mode);
  return vector_angle(a.values, b.values);
}

double compute_angle(const SearchSpace& space, const ArchEncoding& encoding,
                     const Snapshot& snapshot, SkipMode mode, Comparison comparison,
                     const SuperNetWeights* other_initial) {
  if (comparison == Comparison::kInitVsTrained)
    return compute_angle(space, encoding, snapshot.initial, snapshot.current, mode);
  if (other_initial == nullptr)
    throw ContractViolation("init_vs_init comparison needs a second initial store");
  if (!snapshot.initial.same_keys(*other_initial))
    throw ContractViolation("init_vs_init stores must share the same key set");
  return compute_angle(space, encoding, snapshot.initial, *other_initial, mode);
}

}  // namespace rlnas

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

#ifndef RLNAS_LABELS_HPP
#define RLNAS_LABELS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rlnas {

enum class LabelMethod {
  kGroundTruth,
  kUniformOnce,     // uniform labels drawn once before training
  kShuffleOnce,     // ground-truth labels permuted once
  kUniformPerIter,  // fresh uniform labels every optimizer step
  kShufflePerIter,  // fresh permutation of ground truth every step
};

std::string_view to_string(LabelMethod m);
LabelMethod parse_label_method(std::string_view s);  // throws ConfigError

// Maps (sample index, iteration) to a class id. Immutable once built; the
// once-methods materialize their table at construction, the per-iteration
// methods derive a fresh stream from (seed, iteration) on demand.
class LabelSource {
 public:
  LabelSource(LabelMethod method, int num_categories, std::uint64_t seed,
              std::vector<int> ground_truth);
  // Ground-truth free variant for uniform methods.
  LabelSource(LabelMethod method, int num_categories, std::uint64_t seed,
              std::size_t dataset_size);

  LabelMethod method() const { return method_; }
  int num_categories() const { return num_categories_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t dataset_size() const { return size_; }

  // Throws LabelError when sample_index >= dataset_size().
  int label_at(std::size_t sample_index, long iteration) const;

  // Labels of `indices` at one iteration; one permutation per call for the
  // per-iteration shuffle method.
  std::vector<int> labels_for(std::span<const std::size_t> indices, long iteration) const;

  // Full assignment of all N samples at one iteration.
  std::vector<int> assignment(long iteration) const;

 private:
  std::vector<int> shuffled(std::uint64_t stream_seed) const;
  std::vector<int> uniform(std::uint64_t stream_seed) const;

  LabelMethod method_;
  int num_categories_;
  std::uint64_t seed_;
  std::size_t size_;
  std::vector<int> ground_truth_;
  std::vector<int> fixed_;  // once-methods and ground truth
};

// One uniform_once source per category count. Seeds are derived from
// base_seed and C, so equal inputs give equal assignments.
std::vector<LabelSource> category_sweep_config(std::span<const int> categories,
                                               std::size_t dataset_size,
                                               std::uint64_t base_seed);

}  // namespace rlnas

#endif  // RLNAS_LABELS_HPP

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

#include "rlnas/labels.hpp"

#include <fmt/format.h>

#include "rlnas/errors.hpp"
#include "rlnas/rng.hpp"

namespace rlnas {

namespace {

constexpr std::uint64_t kOnceStream = 0x6f6e6365ULL;  // "once"

bool is_shuffle(LabelMethod m) {
  return m == LabelMethod::kShuffleOnce || m == LabelMethod::kShufflePerIter;
}

bool is_per_iter(LabelMethod m) {
  return m == LabelMethod::kUniformPerIter || m == LabelMethod::kShufflePerIter;
}

LabelMethod require_uniform(LabelMethod m) {
  if (m != LabelMethod::kUniformOnce && m != LabelMethod::kUniformPerIter)
    throw ContractViolation(fmt::format("label method {} needs ground-truth labels", to_string(m)));
  return m;
}

}  // namespace

std::string_view to_string(LabelMethod m) {
  switch (m) {
    case LabelMethod::kGroundTruth:
      return "ground_truth";
    case LabelMethod::kUniformOnce:
      return "uniform_once";
    case LabelMethod::kShuffleOnce:
      return "shuffle_once";
    case LabelMethod::kUniformPerIter:
      return "uniform_per_iter";
    case LabelMethod::kShufflePerIter:
      return "shuffle_per_iter";
  }
  return "?";
}

LabelMethod parse_label_method(std::string_view s) {
  for (auto m : {LabelMethod::kGroundTruth, LabelMethod::kUniformOnce, LabelMethod::kShuffleOnce,
                 LabelMethod::kUniformPerIter, LabelMethod::kShufflePerIter})
    if (to_string(m) == s) return m;
  throw ConfigError(fmt::format("unknown label method '{}'", s));
}

LabelSource::LabelSource(LabelMethod method, int num_categories, std::uint64_t seed,
                         std::vector<int> ground_truth)
    : method_(method),
      num_categories_(num_categories),
      seed_(seed),
      size_(ground_truth.size()),
      ground_truth_(std::move(ground_truth)) {
  if (num_categories_ < 1) throw ContractViolation("label source needs >= 1 category");
  if (method_ == LabelMethod::kGroundTruth || is_shuffle(method_)) {
    for (int y : ground_truth_)
      if (y < 0 || y >= num_categories_)
        throw LabelError(fmt::format("ground-truth label {} outside [0, {})", y, num_categories_));
  }
  switch (method_) {
    case LabelMethod::kGroundTruth:
      fixed_ = ground_truth_;
      break;
    case LabelMethod::kUniformOnce:
      fixed_ = uniform(derive_seed(seed_, kOnceStream));
      break;
    case LabelMethod::kShuffleOnce:
      fixed_ = shuffled(derive_seed(seed_, kOnceStream));
      break;
    default:
      break;
  }
}

LabelSource::LabelSource(LabelMethod method, int num_categories, std::uint64_t seed,
                         std::size_t dataset_size)
    : LabelSource(require_uniform(method), num_categories, seed,
                  std::vector<int>(dataset_size, 0)) {}

std::vector<int> LabelSource::uniform(std::uint64_t stream_seed) const {
  Rng rng(stream_seed);
  std::vector<int> out(size_);
  for (auto& y : out) y = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(num_categories_)));
  return out;
}

std::vector<int> LabelSource::shuffled(std::uint64_t stream_seed) const {
  Rng rng(stream_seed);
  std::vector<int> out = ground_truth_;
  rng.shuffle(std::span<int>(out));
  return out;
}

std::vector<int> LabelSource::assignment(long iteration) const {
  if (!is_per_iter(method_)) return fixed_;
  const auto stream = derive_seed(seed_, static_cast<std::uint64_t>(iteration) + 1);
  return method_ == LabelMethod::kUniformPerIter ? uniform(stream) : shuffled(stream);
}

std::vector<int> LabelSource::labels_for(std::span<const std::size_t> indices,
                                         long iteration) const {
  for (auto i : indices)
    if (i >= size_)
      throw LabelError(fmt::format("sample index {} outside dataset of {}", i, size_));
  std::vector<int> out;
  out.reserve(indices.size());
  if (!is_per_iter(method_)) {
    for (auto i : indices) out.push_back(fixed_[i]);
    return out;
  }
  const auto table = assignment(iteration);
  for (auto i : indices) out.push_back(table[i]);
  return out;
}

int LabelSource::label_at(std::size_t sample_index, long iteration) const {
  const std::size_t idx[] = {sample_index};
  return labels_for(idx, iteration).front();
}

std::vector<LabelSource> category_sweep_config(std::span<const int> categories,
                                               std::size_t dataset_size,
                                               std::uint64_t base_seed) {
  if (categories.empty()) throw ContractViolation("category sweep needs at least one entry");
  std::vector<LabelSource> out;
  out.reserve(categories.size());
  for (int c : categories) {
    if (c < 2) throw ContractViolation(fmt::format("category count {} < 2", c));
    out.emplace_back(LabelMethod::kUniformOnce, c,
                     derive_seed(base_seed, static_cast<std::uint64_t>(c)), dataset_size);
  }
  return out;
}

}  // namespace rlnas

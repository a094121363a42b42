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

#ifndef RLNAS_DATASET_HPP
#define RLNAS_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "rlnas/tensor.hpp"

namespace rlnas {

// Images [N,C,H,W] with ground-truth class ids.
struct Dataset {
  Tensor images;
  std::vector<int> labels;
  int num_classes = 0;

  std::size_t size() const { return labels.size(); }
  int channels() const { return images.dim(1); }
  int height() const { return images.dim(2); }
  int width() const { return images.dim(3); }

  // Gathers samples into a [B,C,H,W] batch.
  Tensor batch(std::span<const std::size_t> indices) const;
  std::vector<int> batch_labels(std::span<const std::size_t> indices) const;
};

// Class-conditional Gaussian blobs rendered to H x W x 3. Each class owns a
// blob centre and colour drawn from `seed`; samples jitter the centre and add
// pixel noise. Labels cycle 0..C-1, so classes are balanced.
struct SyntheticSpec {
  int height = 8;
  int width = 8;
  int num_classes = 10;
  double sigma = 1.5;
  double jitter = 0.75;
  double noise = 0.3;
  std::uint64_t seed = 0;
};

// `split` selects an independent sample stream over the same classes.
Dataset make_synthetic(const SyntheticSpec& spec, std::size_t n, std::uint64_t split);

// Raw little-endian array file: "RLDS", u32 N, C, H, W, num_classes,
// N*C*H*W f32 pixels, N u32 labels.
Dataset load_raw_dataset(const std::filesystem::path& path);
void save_raw_dataset(const std::filesystem::path& path, const Dataset& data);

}  // namespace rlnas

#endif  // RLNAS_DATASET_HPP

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

#include "rlnas/dataset.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "rlnas/byte_io.hpp"
#include "rlnas/errors.hpp"
#include "rlnas/rng.hpp"

namespace rlnas {

Tensor Dataset::batch(std::span<const std::size_t> indices) const {
  const std::size_t per = images.size() / std::max<std::size_t>(size(), 1);
  Tensor out({static_cast<int>(indices.size()), channels(), height(), width()});
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= size()) throw ContractViolation("batch index out of range");
    std::copy_n(images.ptr() + indices[i] * per, per, out.ptr() + i * per);
  }
  return out;
}

std::vector<int> Dataset::batch_labels(std::span<const std::size_t> indices) const {
  std::vector<int> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(labels.at(i));
  return out;
}

Dataset make_synthetic(const SyntheticSpec& spec, std::size_t n, std::uint64_t split) {
  if (spec.height < 1 || spec.width < 1 || spec.num_classes < 1)
    throw ContractViolation("synthetic dataset needs positive dims and classes");
  constexpr int kChannels = 3;
  struct Blob {
    double cy, cx;
    double color[kChannels];
  };
  Rng class_rng(derive_seed(spec.seed, 0x636c617373ULL));
  std::vector<Blob> blobs(static_cast<std::size_t>(spec.num_classes));
  for (auto& b : blobs) {
    b.cy = class_rng.uniform(0.0, spec.height - 1.0);
    b.cx = class_rng.uniform(0.0, spec.width - 1.0);
    for (double& c : b.color) c = class_rng.uniform(-1.0, 1.0);
  }

  Dataset d;
  d.num_classes = spec.num_classes;
  d.images = Tensor({static_cast<int>(n), kChannels, spec.height, spec.width});
  d.labels.resize(n);
  Rng rng(derive_seed(spec.seed, split + 1));
  const double inv2s2 = 1.0 / (2.0 * spec.sigma * spec.sigma);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % static_cast<std::size_t>(spec.num_classes));
    d.labels[i] = y;
    const Blob& b = blobs[static_cast<std::size_t>(y)];
    const double cy = b.cy + rng.normal(0.0, spec.jitter);
    const double cx = b.cx + rng.normal(0.0, spec.jitter);
    for (int c = 0; c < kChannels; ++c)
      for (int h = 0; h < spec.height; ++h)
        for (int w = 0; w < spec.width; ++w) {
          const double r2 = (h - cy) * (h - cy) + (w - cx) * (w - cx);
          const double v = b.color[c] * std::exp(-r2 * inv2s2) + rng.normal(0.0, spec.noise);
          d.images.at(static_cast<int>(i), c, h, w) = static_cast<float>(v);
        }
  }
  return d;
}

Dataset load_raw_dataset(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  io::ByteReader r(bytes);
  if (r.get_bytes(4) != "RLDS") throw FormatError(fmt::format("{}: not an RLDS file", path.string()));
  const auto n = r.get<std::uint32_t>();
  const auto c = r.get<std::uint32_t>();
  const auto h = r.get<std::uint32_t>();
  const auto w = r.get<std::uint32_t>();
  const auto k = r.get<std::uint32_t>();
  if (k == 0) throw FormatError("dataset declares zero classes");
  Dataset d;
  d.num_classes = static_cast<int>(k);
  d.images = Tensor({static_cast<int>(n), static_cast<int>(c), static_cast<int>(h), static_cast<int>(w)});
  for (auto& v : d.images.data()) v = r.get<float>();
  d.labels.resize(n);
  for (auto& y : d.labels) {
    y = static_cast<int>(r.get<std::uint32_t>());
    if (y >= d.num_classes) throw FormatError(fmt::format("label {} outside [0, {})", y, k));
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after dataset payload");
  if (!d.images.all_finite()) throw FormatError("dataset contains non-finite pixels");
  return d;
}

void save_raw_dataset(const std::filesystem::path& path, const Dataset& data) {
  io::ByteWriter w;
  w.put_bytes("RLDS");
  w.put(static_cast<std::uint32_t>(data.size()));
  for (int i = 1; i < 4; ++i) w.put(static_cast<std::uint32_t>(data.images.dim(static_cast<std::size_t>(i))));
  w.put(static_cast<std::uint32_t>(data.num_classes));
  for (float v : data.images.data()) w.put(v);
  for (int y : data.labels) w.put(static_cast<std::uint32_t>(y));
  io::write_file(path, w.bytes());
}

}  // namespace rlnas

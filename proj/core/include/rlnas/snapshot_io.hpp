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

#ifndef RLNAS_SNAPSHOT_IO_HPP
#define RLNAS_SNAPSHOT_IO_HPP

/*
 * Binary snapshot file, little-endian:
 *
 *   "RLNS" u8 version=1
 *   section "W0": u32 count, count x tensor
 *   section "WT": u32 count, count x tensor
 *   u32 CRC32 (zlib polynomial) of every preceding byte
 *
 *   tensor := u16 name_len, name (UTF-8), u8 ndim, ndim x u32 dim, f32 payload
 *
 * Tensors are written in name order. Metadata and the training log are not
 * part of the binary and travel in a JSON sidecar written by the CLI.
 */

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "rlnas/supernet.hpp"

namespace rlnas {

inline constexpr std::uint8_t kSnapshotVersion = 1;

std::vector<unsigned char> encode_snapshot(const Snapshot& snap);
// Throws FormatError on bad magic, version, truncation or CRC mismatch.
Snapshot decode_snapshot(std::span<const unsigned char> bytes);

void save_snapshot(const std::filesystem::path& path, const Snapshot& snap);
Snapshot load_snapshot(const std::filesystem::path& path);

std::uint32_t crc32(std::span<const unsigned char> bytes);

}  // namespace rlnas

#endif  // RLNAS_SNAPSHOT_IO_HPP

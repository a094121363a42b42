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

#include "rlnas/snapshot_io.hpp"

#include <limits>

#include <fmt/format.h>
#include <zlib.h>

#include "rlnas/byte_io.hpp"
#include "rlnas/errors.hpp"

namespace rlnas {

namespace {

void put_section(io::ByteWriter& w, std::string_view tag, const TensorStore& store) {
  w.put_bytes(tag);
  w.put(static_cast<std::uint32_t>(store.size()));
  for (const auto& [name, t] : store) {
    if (name.size() > std::numeric_limits<std::uint16_t>::max())
      throw FormatError(fmt::format("tensor name too long: {}", name));
    if (t.ndim() > std::numeric_limits<std::uint8_t>::max())
      throw FormatError(fmt::format("tensor {} has too many dims", name));
    w.put(static_cast<std::uint16_t>(name.size()));
    w.put_bytes(name);
    w.put(static_cast<std::uint8_t>(t.ndim()));
    for (int d : t.shape()) w.put(static_cast<std::uint32_t>(d));
    for (float v : t.data()) w.put(v);
  }
}

TensorStore get_section(io::ByteReader& r, std::string_view tag) {
  if (r.get_bytes(2) != tag) throw FormatError(fmt::format("expected section '{}'", tag));
  const auto count = r.get<std::uint32_t>();
  TensorStore store;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = r.get<std::uint16_t>();
    std::string name = r.get_bytes(len);
    const auto ndim = r.get<std::uint8_t>();
    Shape shape(ndim);
    std::size_t numel = 1;
    for (auto& d : shape) {
      const auto u = r.get<std::uint32_t>();
      if (u > static_cast<std::uint32_t>(std::numeric_limits<int>::max()))
        throw FormatError(fmt::format("tensor {} has an oversized dim", name));
      d = static_cast<int>(u);
      numel *= u;
    }
    if (numel * sizeof(float) > r.remaining())
      throw FormatError(fmt::format("tensor {} payload truncated", name));
    std::vector<float> data(numel);
    for (auto& v : data) v = r.get<float>();
    if (!store.emplace(name, Tensor(std::move(shape), std::move(data))).second)
      throw FormatError(fmt::format("duplicate tensor '{}' in section {}", name, tag));
  }
  return store;
}

}  // namespace

std::uint32_t crc32(std::span<const unsigned char> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    const auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size() - pos, 1u << 30));
    crc = ::crc32(crc, bytes.data() + pos, n);
    pos += n;
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<unsigned char> encode_snapshot(const Snapshot& snap) {
  if (!snap.initial.same_keys(snap.current))
    throw ContractViolation("snapshot W0 and Wt must hold the same tensors");
  io::ByteWriter w;
  w.put_bytes("RLNS");
  w.put(kSnapshotVersion);
  put_section(w, "W0", snap.initial.store);
  put_section(w, "WT", snap.current.store);
  w.put(crc32(w.bytes()));
  return std::move(w.bytes());
}

Snapshot decode_snapshot(std::span<const unsigned char> bytes) {
  if (bytes.size() < 9) throw FormatError("snapshot too short");
  const auto body = bytes.first(bytes.size() - 4);
  io::ByteReader tail(bytes.last(4));
  const auto stored = tail.get<std::uint32_t>();
  if (crc32(body) != stored) throw FormatError("snapshot CRC mismatch");

  io::ByteReader r(body);
  if (r.get_bytes(4) != "RLNS") throw FormatError("not a snapshot file (bad magic)");
  const auto version = r.get<std::uint8_t>();
  if (version != kSnapshotVersion)
    throw FormatError(fmt::format("unsupported snapshot version {}", version));
  Snapshot snap;
  snap.initial.store = get_section(r, "W0");
  snap.current.store = get_section(r, "WT");
  if (r.remaining() != 0) throw FormatError("trailing bytes before CRC");
  if (!snap.initial.same_keys(snap.current))
    throw FormatError("snapshot sections hold different tensors");
  return snap;
}

void save_snapshot(const std::filesystem::path& path, const Snapshot& snap) {
  io::write_file(path, encode_snapshot(snap));
}

Snapshot load_snapshot(const std::filesystem::path& path) {
  return decode_snapshot(io::read_file(path));
}

}  // namespace rlnas

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

#ifndef RLNAS_SEARCH_SPACE_HPP
#define RLNAS_SEARCH_SPACE_HPP

/*
 * Cell-based search spaces.
 *
 * A cell is a DAG over feature nodes 0..num_nodes-1; every edge (from, to)
 * with from < to carries exactly one candidate operation. A node's value is
 * the elementwise sum of its incoming edge outputs. The network stacks
 * `stack_depth` copies of the cell, each with its own weights.
 *
 * An ArchEncoding picks one alternative per edge and identifies a single
 * path through the weight-sharing SuperNet.
 */

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rlnas/rng.hpp"

namespace rlnas {

enum class OpType : std::uint8_t { kNone, kSkip, kConv, kAvgPool, kMaxPool };

struct OpKind {
  OpType type = OpType::kNone;
  int kernel = 0;  // 0 for none/skip

  static OpKind none() { return {OpType::kNone, 0}; }
  static OpKind skip() { return {OpType::kSkip, 0}; }
  static OpKind conv(int k);
  static OpKind avg_pool(int k);
  static OpKind max_pool(int k);

  // "none", "skip_connect", "conv_3x3", "avg_pool_3x3", "max_pool_3x3".
  std::string name() const;
  static OpKind parse(std::string_view name);  // throws DecodeError

  bool has_weights() const { return type == OpType::kConv; }
  bool is_pool() const {
    return type == OpType::kAvgPool || type == OpType::kMaxPool;
  }

  friend bool operator==(const OpKind&, const OpKind&) = default;
};

struct Edge {
  int from = 0;
  int to = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

// Ordered list of edge indices from an input node to an output node.
using Path = std::vector<int>;

struct CellTopology {
  int num_nodes = 0;
  std::vector<Edge> edges;
  std::vector<int> input_nodes;
  std::vector<int> output_nodes;

  // Throws ContractViolation when an invariant does not hold: from < to,
  // node ids in range, and every output reachable from some input.
  void validate() const;

  // 4 nodes, all 6 pairs i<j, ordered by target node: (0,1) (0,2) (1,2)
  // (0,3) (1,3) (2,3). Input {0}, output {3}.
  static CellTopology nas_bench_201();
  // Two input nodes, `intermediate` intermediate nodes, each fed by every
  // preceding node; every intermediate node is an output.
  static CellTopology darts_like(int intermediate = 2);
  // 3 nodes, edges (0,1) (0,2) (1,2), input {0}, output {2}.
  static CellTopology triangle();
};

struct ArchEncoding {
  std::vector<int> choices;

  ArchEncoding() = default;
  explicit ArchEncoding(std::vector<int> c) : choices(std::move(c)) {}

  std::size_t size() const { return choices.size(); }
  int operator[](std::size_t i) const { return choices[i]; }

  friend bool operator==(const ArchEncoding&, const ArchEncoding&) = default;
  friend auto operator<=>(const ArchEncoding&, const ArchEncoding&) = default;
};

struct SearchSpace {
  CellTopology cell;
  std::vector<std::vector<OpKind>> alternatives;  // one list per edge
  int stack_depth = 1;
  // Channel count of each stacked cell. A change between consecutive cells
  // inserts a fixed 2x2 average pool and a learned 1x1 projection.
  std::vector<int> channels;

  void validate() const;

  std::size_t num_edges() const { return cell.edges.size(); }
  const OpKind& op(const ArchEncoding& a, std::size_t edge) const {
    return alternatives[edge][static_cast<std::size_t>(a[edge])];
  }
  // Throws ContractViolation when `a` does not fit this space.
  void check(const ArchEncoding& a) const;

  // Canonical one-line description; the basis of space_hash().
  std::string describe() const;

  // {none, skip_connect, conv_1x1, conv_3x3, avg_pool_3x3} on every edge.
  static SearchSpace nas_bench_201(int stack_depth = 2, int channels = 8);
  // {none, skip_connect, conv_3x3, avg_pool_3x3, max_pool_3x3}.
  static SearchSpace darts_like(int stack_depth = 2, int channels = 8);
  // Triangle cell with {none, conv_3x3, avg_pool_3x3}: 27 architectures.
  static SearchSpace toy3(int stack_depth = 1, int channels = 4);
};

std::uint64_t space_size(const SearchSpace& space);

// FNV-1a over describe().
std::uint64_t space_hash(const SearchSpace& space);

// Every simple path from an input node to an output node whose edges are all
// active. Sorted by (input node order, output node order, edge sequence).
std::vector<Path> enumerate_paths(const CellTopology& cell,
                                  const std::vector<bool>& edge_active);
std::vector<Path> enumerate_paths(const SearchSpace& space,
                                  const ArchEncoding& encoding);

ArchEncoding random_arch(const SearchSpace& space, Rng& rng);

// All encodings in odometer order (last edge varies fastest).
std::vector<ArchEncoding> all_encodings(const SearchSpace& space);

// "|op~from|op~from|...|" in edge order.
std::string encode_str(const SearchSpace& space, const ArchEncoding& a);
// Throws DecodeError on an unknown op, an op not offered on that edge, a
// wrong source node or a wrong edge count.
ArchEncoding decode_str(std::string_view text, const SearchSpace& space);

}  // namespace rlnas

#endif  // RLNAS_SEARCH_SPACE_HPP

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

#include "rlnas/search_space.hpp"

#include <algorithm>
#include <charconv>
#include <limits>

#include <fmt/format.h>

#include "rlnas/errors.hpp"

namespace rlnas {

namespace {

void check_kernel(int k) {
  if (k <= 0 || k % 2 == 0)
    throw ContractViolation(fmt::format("kernel size must be odd and positive, got {}", k));
}

// Parses "KxK" and returns K, or 0 on mismatch.
int parse_square_kernel(std::string_view s) {
  const auto x = s.find('x');
  if (x == std::string_view::npos || x == 0) return 0;
  int a = 0;
  int b = 0;
  auto r1 = std::from_chars(s.data(), s.data() + x, a);
  auto r2 = std::from_chars(s.data() + x + 1, s.data() + s.size(), b);
  if (r1.ec != std::errc{} || r1.ptr != s.data() + x) return 0;
  if (r2.ec != std::errc{} || r2.ptr != s.data() + s.size()) return 0;
  if (a != b || a <= 0 || a % 2 == 0) return 0;
  return a;
}

void dfs_paths(const CellTopology& cell, const std::vector<bool>& active,
               int node, int target, Path& current, std::vector<Path>& out) {
  if (node == target && !current.empty()) {
    out.push_back(current);
    return;
  }
  for (std::size_t e = 0; e < cell.edges.size(); ++e) {
    if (!active[e] || cell.edges[e].from != node) continue;
    // from < to, so the walk cannot revisit a node.
    if (cell.edges[e].to > target) continue;
    current.push_back(static_cast<int>(e));
    dfs_paths(cell, active, cell.edges[e].to, target, current, out);
    current.pop_back();
  }
}

}  // namespace

OpKind OpKind::conv(int k) {
  check_kernel(k);
  return {OpType::kConv, k};
}

OpKind OpKind::avg_pool(int k) {
  check_kernel(k);
  return {OpType::kAvgPool, k};
}

OpKind OpKind::max_pool(int k) {
  check_kernel(k);
  return {OpType::kMaxPool, k};
}

std::string OpKind::name() const {
  switch (type) {
    case OpType::kNone:
      return "none";
    case OpType::kSkip:
      return "skip_connect";
    case OpType::kConv:
      return fmt::format("conv_{}x{}", kernel, kernel);
    case OpType::kAvgPool:
      return fmt::format("avg_pool_{}x{}", kernel, kernel);
    case OpType::kMaxPool:
      return fmt::format("max_pool_{}x{}", kernel, kernel);
  }
  return "?";
}

OpKind OpKind::parse(std::string_view name) {
  if (name == "none") return none();
  if (name == "skip_connect") return skip();
  struct Prefix {
    std::string_view text;
    OpType type;
  };
  constexpr Prefix prefixes[] = {{"conv_", OpType::kConv},
                                 {"avg_pool_", OpType::kAvgPool},
                                 {"max_pool_", OpType::kMaxPool}};
  for (const auto& p : prefixes) {
    if (name.starts_with(p.text)) {
      const int k = parse_square_kernel(name.substr(p.text.size()));
      if (k > 0) return {p.type, k};
    }
  }
  throw DecodeError(fmt::format("unknown operation '{}'", name));
}

void CellTopology::validate() const {
  if (num_nodes < 2) throw ContractViolation("cell needs at least two nodes");
  for (const auto& e : edges) {
    if (e.from < 0 || e.to >= num_nodes || e.from >= e.to)
      throw ContractViolation(fmt::format("invalid edge ({},{})", e.from, e.to));
  }
  for (std::size_t i = 0; i < edges.size(); ++i)
    for (std::size_t j = i + 1; j < edges.size(); ++j)
      if (edges[i] == edges[j])
        throw ContractViolation(fmt::format("duplicate edge ({},{})", edges[i].from, edges[i].to));
  if (input_nodes.empty() || output_nodes.empty())
    throw ContractViolation("cell needs input and output nodes");
  for (int n : input_nodes)
    if (n < 0 || n >= num_nodes) throw ContractViolation("input node out of range");
  for (int n : output_nodes)
    if (n < 0 || n >= num_nodes) throw ContractViolation("output node out of range");
  for (const auto& e : edges)
    if (std::find(input_nodes.begin(), input_nodes.end(), e.to) != input_nodes.end())
      throw ContractViolation(fmt::format("input node {} has an incoming edge", e.to));

  const std::vector<bool> all(edges.size(), true);
  for (int out : output_nodes) {
    if (std::find(input_nodes.begin(), input_nodes.end(), out) != input_nodes.end())
      continue;
    bool reached = false;
    for (int in : input_nodes) {
      std::vector<Path> paths;
      Path cur;
      dfs_paths(*this, all, in, out, cur, paths);
      if (!paths.empty()) {
        reached = true;
        break;
      }
    }
    if (!reached)
      throw ContractViolation(fmt::format("output node {} unreachable from inputs", out));
  }
}

CellTopology CellTopology::nas_bench_201() {
  CellTopology c;
  c.num_nodes = 4;
  for (int to = 1; to < 4; ++to)
    for (int from = 0; from < to; ++from) c.edges.push_back({from, to});
  c.input_nodes = {0};
  c.output_nodes = {3};
  return c;
}

CellTopology CellTopology::darts_like(int intermediate) {
  if (intermediate < 1) throw ContractViolation("darts_like needs >= 1 intermediate node");
  CellTopology c;
  c.num_nodes = 2 + intermediate;
  for (int to = 2; to < c.num_nodes; ++to)
    for (int from = 0; from < to; ++from) c.edges.push_back({from, to});
  c.input_nodes = {0, 1};
  for (int n = 2; n < c.num_nodes; ++n) c.output_nodes.push_back(n);
  return c;
}

CellTopology CellTopology::triangle() {
  CellTopology c;
  c.num_nodes = 3;
  c.edges = {{0, 1}, {0, 2}, {1, 2}};
  c.input_nodes = {0};
  c.output_nodes = {2};
  return c;
}

void SearchSpace::validate() const {
  cell.validate();
  if (alternatives.size() != cell.edges.size())
    throw ContractViolation("one alternative list per edge required");
  for (const auto& alts : alternatives) {
    if (alts.empty()) throw ContractViolation("edge with no alternatives");
    for (std::size_t i = 0; i < alts.size(); ++i) {
      if (alts[i].type != OpType::kNone && alts[i].type != OpType::kSkip)
        check_kernel(alts[i].kernel);
      for (std::size_t j = i + 1; j < alts.size(); ++j)
        if (alts[i] == alts[j])
          throw ContractViolation(fmt::format("duplicate alternative '{}'", alts[i].name()));
    }
  }
  if (stack_depth < 1) throw ContractViolation("stack_depth must be >= 1");
  if (channels.size() != static_cast<std::size_t>(stack_depth))
    throw ContractViolation("channels must list one value per stacked cell");
  for (int c : channels)
    if (c < 1) throw ContractViolation("channel count must be positive");
}

void SearchSpace::check(const ArchEncoding& a) const {
  if (a.size() != num_edges())
    throw ContractViolation(
        fmt::format("encoding has {} choices, space has {} edges", a.size(), num_edges()));
  for (std::size_t e = 0; e < a.size(); ++e)
    if (a[e] < 0 || static_cast<std::size_t>(a[e]) >= alternatives[e].size())
      throw ContractViolation(fmt::format("choice {} out of range on edge {}", a[e], e));
}

std::string SearchSpace::describe() const {
  std::string s = fmt::format("nodes={};edges=", cell.num_nodes);
  for (std::size_t e = 0; e < cell.edges.size(); ++e) {
    s += fmt::format("({},{})[", cell.edges[e].from, cell.edges[e].to);
    for (const auto& op : alternatives[e]) s += op.name() + ",";
    s += "]";
  }
  s += ";in=";
  for (int n : cell.input_nodes) s += fmt::format("{},", n);
  s += ";out=";
  for (int n : cell.output_nodes) s += fmt::format("{},", n);
  s += fmt::format(";depth={};channels=", stack_depth);
  for (int c : channels) s += fmt::format("{},", c);
  return s;
}

SearchSpace SearchSpace::nas_bench_201(int stack_depth, int channels) {
  SearchSpace s;
  s.cell = CellTopology::nas_bench_201();
  const std::vector<OpKind> ops = {OpKind::none(), OpKind::skip(), OpKind::conv(1),
                                   OpKind::conv(3), OpKind::avg_pool(3)};
  s.alternatives.assign(s.cell.edges.size(), ops);
  s.stack_depth = stack_depth;
  s.channels.assign(static_cast<std::size_t>(std::max(stack_depth, 0)), channels);
  s.validate();
  return s;
}

SearchSpace SearchSpace::darts_like(int stack_depth, int channels) {
  SearchSpace s;
  s.cell = CellTopology::darts_like(2);
  const std::vector<OpKind> ops = {OpKind::none(), OpKind::skip(), OpKind::conv(3),
                                   OpKind::avg_pool(3), OpKind::max_pool(3)};
  s.alternatives.assign(s.cell.edges.size(), ops);
  s.stack_depth = stack_depth;
  s.channels.assign(static_cast<std::size_t>(std::max(stack_depth, 0)), channels);
  s.validate();
  return s;
}

SearchSpace SearchSpace::toy3(int stack_depth, int channels) {
  SearchSpace s;
  s.cell = CellTopology::triangle();
  const std::vector<OpKind> ops = {OpKind::none(), OpKind::conv(3), OpKind::avg_pool(3)};
  s.alternatives.assign(s.cell.edges.size(), ops);
  s.stack_depth = stack_depth;
  s.channels.assign(static_cast<std::size_t>(std::max(stack_depth, 0)), channels);
  s.validate();
  return s;
}

std::uint64_t space_size(const SearchSpace& space) {
  std::uint64_t n = 1;
  for (const auto& alts : space.alternatives) {
    if (n > std::numeric_limits<std::uint64_t>::max() / alts.size())
      throw ContractViolation("space size overflows 64 bits");
    n *= alts.size();
  }
  return n;
}

std::uint64_t space_hash(const SearchSpace& space) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : space.describe()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<Path> enumerate_paths(const CellTopology& cell,
                                  const std::vector<bool>& edge_active) {
  if (edge_active.size() != cell.edges.size())
    throw ContractViolation("edge mask size does not match cell");
  std::vector<Path> result;
  for (int in : cell.input_nodes) {
    for (int out : cell.output_nodes) {
      std::vector<Path> found;
      Path cur;
      dfs_paths(cell, edge_active, in, out, cur, found);
      std::sort(found.begin(), found.end());
      result.insert(result.end(), found.begin(), found.end());
    }
  }
  return result;
}

std::vector<Path> enumerate_paths(const SearchSpace& space, const ArchEncoding& encoding) {
  space.check(encoding);
  std::vector<bool> active(space.num_edges());
  for (std::size_t e = 0; e < active.size(); ++e)
    active[e] = space.op(encoding, e).type != OpType::kNone;
  return enumerate_paths(space.cell, active);
}

ArchEncoding random_arch(const SearchSpace& space, Rng& rng) {
  std::vector<int> c(space.num_edges());
  for (std::size_t e = 0; e < c.size(); ++e)
    c[e] = static_cast<int>(rng.uniform_index(space.alternatives[e].size()));
  return ArchEncoding(std::move(c));
}

std::vector<ArchEncoding> all_encodings(const SearchSpace& space) {
  const auto total = space_size(space);
  std::vector<ArchEncoding> out;
  out.reserve(total);
  std::vector<int> c(space.num_edges(), 0);
  for (std::uint64_t i = 0; i < total; ++i) {
    out.emplace_back(c);
    for (std::size_t e = c.size(); e-- > 0;) {
      if (++c[e] < static_cast<int>(space.alternatives[e].size())) break;
      c[e] = 0;
    }
  }
  return out;
}

std::string encode_str(const SearchSpace& space, const ArchEncoding& a) {
  space.check(a);
  std::string s = "|";
  for (std::size_t e = 0; e < a.size(); ++e)
    s += fmt::format("{}~{}|", space.op(a, e).name(), space.cell.edges[e].from);
  return s;
}

ArchEncoding decode_str(std::string_view text, const SearchSpace& space) {
  if (text.size() < 2 || text.front() != '|' || text.back() != '|')
    throw DecodeError(fmt::format("architecture string must start and end with '|': '{}'", text));
  std::vector<std::string_view> segments;
  std::size_t pos = 1;
  while (pos < text.size()) {
    const auto next = text.find('|', pos);
    segments.push_back(text.substr(pos, next - pos));
    pos = next + 1;
  }
  if (segments.size() != space.num_edges())
    throw DecodeError(fmt::format("architecture string has {} segments, space has {} edges",
                                  segments.size(), space.num_edges()));
  std::vector<int> choices(segments.size());
  for (std::size_t e = 0; e < segments.size(); ++e) {
    const auto seg = segments[e];
    const auto tilde = seg.rfind('~');
    if (tilde == std::string_view::npos)
      throw DecodeError(fmt::format("segment '{}' lacks '~from'", seg));
    const OpKind op = OpKind::parse(seg.substr(0, tilde));
    int from = -1;
    const auto num = seg.substr(tilde + 1);
    auto r = std::from_chars(num.data(), num.data() + num.size(), from);
    if (r.ec != std::errc{} || r.ptr != num.data() + num.size() ||
        from != space.cell.edges[e].from)
      throw DecodeError(fmt::format("segment '{}' names the wrong source node for edge {}", seg, e));
    const auto& alts = space.alternatives[e];
    const auto it = std::find(alts.begin(), alts.end(), op);
    if (it == alts.end())
      throw DecodeError(fmt::format("operation '{}' is not offered on edge {}", op.name(), e));
    choices[e] = static_cast<int>(it - alts.begin());
  }
  return ArchEncoding(std::move(choices));
}

}  // namespace rlnas

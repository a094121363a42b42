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

#ifndef RLNAS_BENCH_HPP
#define RLNAS_BENCH_HPP

/*
 * Tabular benchmark lookups and ranking correlation.
 *
 * Benchmark files are UTF-8 text, one record per line:
 *
 *   <arch> <dataset_tag> <val_acc> <test_acc> [key=value ...]
 *
 * separated by spaces or tabs; '#' starts a comment line. Accuracies are
 * percentages in [0, 100]. Each (arch, dataset_tag) pair appears once.
 */

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rlnas/search_space.hpp"

namespace rlnas {

struct BenchEntry {
  double val_acc = 0.0;
  double test_acc = 0.0;
  std::map<std::string, std::string> extra;
};

struct BenchRecord {
  std::string arch;
  std::map<std::string, BenchEntry> by_tag;
};

class BenchTable {
 public:
  void add(const std::string& arch, const std::string& tag, BenchEntry entry);  // throws FormatError on duplicates

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const BenchRecord* find(std::string_view arch) const;
  // Throws ContractViolation when the (arch, tag) pair is absent.
  const BenchEntry& entry(std::string_view arch, std::string_view tag) const;
  const std::map<std::string, BenchRecord, std::less<>>& records() const { return records_; }

 private:
  std::map<std::string, BenchRecord, std::less<>> records_;
};

// Throws FormatError with the 1-based line number on malformed lines.
BenchTable parse_bench(std::string_view text);
BenchTable load_bench(const std::filesystem::path& path);
std::string format_bench(const BenchTable& table);

// Additive per-(edge, op) effects plus noise; a stand-in table for spaces
// without a published benchmark. Deterministic in `seed`.
BenchTable synthetic_bench(const SearchSpace& space, std::string_view tag, std::uint64_t seed);

// Architecture strings, best first.
using RankList = std::vector<std::string>;

// tau-a over the common element set. Throws ContractViolation when the
// lists differ as sets, contain duplicates, or have fewer than 2 elements.
// O(n log n) via merge-sort inversion counting.
double kendall_tau(const RankList& a, const RankList& b);

struct RankReport {
  RankList order;               // ranked by metric, failures appended last
  std::vector<double> values;   // aligned with order; NaN for failures
  std::vector<std::string> failed;  // encodings whose metric threw EmptyWeightVector
};

using Metric = std::function<double(const ArchEncoding&)>;

// Evaluates `metric` on every encoding of the space and sorts descending,
// ties broken by architecture string. Encodings raising EmptyWeightVector
// go last in lexicographic order.
RankReport rank_all(const SearchSpace& space, const Metric& metric, int threads = 1);

enum class AccField { kVal, kTest };

// Table rank of the given architectures by accuracy, ties by string.
RankList table_rank(const BenchTable& table, const RankList& archs, std::string_view tag,
                    AccField field);

// CSV with columns arch,metric_value,rank,ground_truth_rank (1-based ranks).
std::string rank_report_csv(const RankReport& report, const RankList& ground_truth);

struct BaselinePick {
  ArchEncoding encoding;
  std::string arch;
  double val_acc = 0.0;
  double test_acc = 0.0;
};

// Draws n architectures uniformly (with replacement unless
// `without_replacement`) and returns the one with the highest val_acc.
BaselinePick random_search_baseline(const SearchSpace& space, const BenchTable& table, int n,
                                    std::string_view tag, std::uint64_t seed,
                                    bool without_replacement = false);

}  // namespace rlnas

#endif  // RLNAS_BENCH_HPP

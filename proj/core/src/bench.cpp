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

#include "rlnas/bench.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

#include <fmt/format.h>

#include "rlnas/byte_io.hpp"
#include "rlnas/errors.hpp"
#include "rlnas/parallel.hpp"
#include "rlnas/rng.hpp"

namespace rlnas {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc{} && r.ptr == s.data() + s.size();
}

// Merge sort counting pairs i<j with v[i] > v[j].
std::uint64_t count_inversions(std::vector<std::size_t>& v, std::vector<std::size_t>& buf,
                               std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t inv = count_inversions(v, buf, lo, mid) + count_inversions(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[i] <= v[j]) {
      buf[k++] = v[i++];
    } else {
      inv += mid - i;
      buf[k++] = v[j++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

}  // namespace

void BenchTable::add(const std::string& arch, const std::string& tag, BenchEntry entry) {
  auto& rec = records_[arch];
  rec.arch = arch;
  if (!rec.by_tag.emplace(tag, std::move(entry)).second)
    throw FormatError(fmt::format("duplicate benchmark record for {} on '{}'", arch, tag));
}

const BenchRecord* BenchTable::find(std::string_view arch) const {
  const auto it = records_.find(arch);
  return it == records_.end() ? nullptr : &it->second;
}

const BenchEntry& BenchTable::entry(std::string_view arch, std::string_view tag) const {
  const auto* rec = find(arch);
  if (rec != nullptr) {
    const auto it = rec->by_tag.find(std::string(tag));
    if (it != rec->by_tag.end()) return it->second;
  }
  throw ContractViolation(fmt::format("benchmark has no entry for {} on '{}'", arch, tag));
}

BenchTable parse_bench(std::string_view text) {
  BenchTable table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto fields = split_ws(line);
    if (fields.empty() || fields.front().starts_with('#')) continue;
    if (fields.size() < 4)
      throw FormatError(fmt::format("benchmark line {}: expected arch, tag, val_acc, test_acc", line_no));
    BenchEntry e;
    if (!parse_double(fields[2], e.val_acc) || !parse_double(fields[3], e.test_acc))
      throw FormatError(fmt::format("benchmark line {}: accuracies must be numbers", line_no));
    for (double v : {e.val_acc, e.test_acc})
      if (!std::isfinite(v) || v < 0.0 || v > 100.0)
        throw FormatError(fmt::format("benchmark line {}: accuracy {} outside [0, 100]", line_no, v));
    for (std::size_t i = 4; i < fields.size(); ++i) {
      const auto eq = fields[i].find('=');
      if (eq == std::string_view::npos || eq == 0)
        throw FormatError(fmt::format("benchmark line {}: '{}' is not key=value", line_no, fields[i]));
      e.extra.emplace(std::string(fields[i].substr(0, eq)), std::string(fields[i].substr(eq + 1)));
    }
    try {
      table.add(std::string(fields[0]), std::string(fields[1]), std::move(e));
    } catch (const FormatError& err) {
      throw FormatError(fmt::format("benchmark line {}: {}", line_no, err.what()));
    }
  }
  return table;
}

BenchTable load_bench(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  return parse_bench(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string format_bench(const BenchTable& table) {
  std::string out = "# arch dataset_tag val_acc test_acc\n";
  for (const auto& [arch, rec] : table.records())
    for (const auto& [tag, e] : rec.by_tag) {
      out += fmt::format("{} {} {:.6f} {:.6f}", arch, tag, e.val_acc, e.test_acc);
      for (const auto& [k, v] : e.extra) out += fmt::format(" {}={}", k, v);
      out += '\n';
    }
  return out;
}

BenchTable synthetic_bench(const SearchSpace& space, std::string_view tag, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x62656e6368ULL));
  std::vector<std::vector<double>> effect(space.num_edges());
  for (std::size_t e = 0; e < space.num_edges(); ++e)
    for (std::size_t o = 0; o < space.alternatives[e].size(); ++o)
      effect[e].push_back(rng.normal(0.0, 3.0));
  BenchTable table;
  for (const auto& enc : all_encodings(space)) {
    double v = 70.0;
    for (std::size_t e = 0; e < enc.size(); ++e) v += effect[e][static_cast<std::size_t>(enc[e])];
    v += rng.normal(0.0, 0.5);
    const double val = std::clamp(v, 0.0, 100.0);
    const double test = std::clamp(val + rng.normal(0.0, 0.3), 0.0, 100.0);
    table.add(encode_str(space, enc), std::string(tag), {val, test, {}});
  }
  return table;
}

double kendall_tau(const RankList& a, const RankList& b) {
  if (a.size() != b.size()) throw ContractViolation("rank lists differ in length");
  const std::size_t n = a.size();
  if (n < 2) throw ContractViolation("kendall_tau needs at least two elements");
  std::unordered_map<std::string_view, std::size_t> pos_b;
  pos_b.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    if (!pos_b.emplace(b[i], i).second)
      throw ContractViolation(fmt::format("duplicate element '{}' in rank list", b[i]));
  std::vector<std::size_t> seq(n);
  std::vector<bool> used(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const auto it = pos_b.find(a[i]);
    if (it == pos_b.end())
      throw ContractViolation(fmt::format("element '{}' missing from second rank list", a[i]));
    if (used[it->second])
      throw ContractViolation(fmt::format("duplicate element '{}' in rank list", a[i]));
    used[it->second] = true;
    seq[i] = it->second;
  }
  std::vector<std::size_t> buf(n);
  const std::uint64_t discordant = count_inversions(seq, buf, 0, n);
  const std::uint64_t pairs = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const auto concordant = pairs - discordant;
  return (static_cast<double>(concordant) - static_cast<double>(discordant)) /
         static_cast<double>(pairs);
}

RankReport rank_all(const SearchSpace& space, const Metric& metric, int threads) {
  const auto encodings = all_encodings(space);
  std::vector<std::string> archs(encodings.size());
  std::vector<double> values(encodings.size());
  std::vector<char> ok(encodings.size(), 1);
  parallel_for(encodings.size(), threads, [&](std::size_t i) {
    archs[i] = encode_str(space, encodings[i]);
    try {
      values[i] = metric(encodings[i]);
    } catch (const EmptyWeightVector&) {
      ok[i] = 0;
      values[i] = std::numeric_limits<double>::quiet_NaN();
    }
  });
  std::vector<std::size_t> good;
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < encodings.size(); ++i) (ok[i] ? good : bad).push_back(i);
  std::sort(good.begin(), good.end(), [&](std::size_t x, std::size_t y) {
    if (values[x] != values[y]) return values[x] > values[y];
    return archs[x] < archs[y];
  });
  std::sort(bad.begin(), bad.end(), [&](std::size_t x, std::size_t y) { return archs[x] < archs[y]; });
  RankReport report;
  for (auto i : good) {
    report.order.push_back(archs[i]);
    report.values.push_back(values[i]);
  }
  for (auto i : bad) {
    report.order.push_back(archs[i]);
    report.values.push_back(values[i]);
    report.failed.push_back(archs[i]);
  }
  return report;
}

RankList table_rank(const BenchTable& table, const RankList& archs, std::string_view tag,
                    AccField field) {
  std::vector<std::pair<double, std::string>> rows;
  rows.reserve(archs.size());
  for (const auto& a : archs) {
    const auto& e = table.entry(a, tag);
    rows.emplace_back(field == AccField::kVal ? e.val_acc : e.test_acc, a);
  }
  std::sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  RankList out;
  out.reserve(rows.size());
  for (auto& r : rows) out.push_back(std::move(r.second));
  return out;
}

std::string rank_report_csv(const RankReport& report, const RankList& ground_truth) {
  std::unordered_map<std::string_view, std::size_t> gt;
  for (std::size_t i = 0; i < ground_truth.size(); ++i) gt.emplace(ground_truth[i], i + 1);
  std::string out = "arch,metric_value,rank,ground_truth_rank\n";
  for (std::size_t i = 0; i < report.order.size(); ++i) {
    const auto it = gt.find(report.order[i]);
    const std::string gt_rank = it == gt.end() ? "" : fmt::format("{}", it->second);
    const double v = report.values[i];
    out += fmt::format("{},{},{},{}\n", report.order[i],
                       std::isnan(v) ? std::string() : fmt::format("{:.17g}", v), i + 1, gt_rank);
  }
  return out;
}

BaselinePick random_search_baseline(const SearchSpace& space, const BenchTable& table, int n,
                                    std::string_view tag, std::uint64_t seed,
                                    bool without_replacement) {
  if (n < 1) throw ContractViolation("random search needs n >= 1");
  Rng rng(seed);
  std::vector<ArchEncoding> picks;
  if (without_replacement) {
    auto all = all_encodings(space);
    if (static_cast<std::size_t>(n) > all.size())
      throw ContractViolation("n exceeds the space size for sampling without replacement");
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
      const auto j = i + static_cast<std::size_t>(rng.uniform_index(all.size() - i));
      std::swap(all[i], all[j]);
      picks.push_back(all[i]);
    }
  } else {
    for (int i = 0; i < n; ++i) picks.push_back(random_arch(space, rng));
  }
  BaselinePick best;
  bool have = false;
  for (const auto& enc : picks) {
    const auto arch = encode_str(space, enc);
    const auto& e = table.entry(arch, tag);
    if (!have || e.val_acc > best.val_acc || (e.val_acc == best.val_acc && arch < best.arch)) {
      best = {enc, arch, e.val_acc, e.test_acc};
      have = true;
    }
  }
  return best;
}

}  // namespace rlnas

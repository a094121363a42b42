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

#ifndef RLNAS_CONFIG_HPP
#define RLNAS_CONFIG_HPP

/*
 * Flat key-value experiment configuration.
 *
 *   # comment
 *   [train]
 *   epochs = 2          -> train.epochs
 *   label.method = uniform_once
 *
 * A [section] header prefixes the keys below it; dotted keys may also be
 * written in full outside any section. Unknown keys are rejected.
 */

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rlnas/angle.hpp"
#include "rlnas/bench.hpp"
#include "rlnas/dataset.hpp"
#include "rlnas/evolution.hpp"
#include "rlnas/labels.hpp"
#include "rlnas/nn.hpp"
#include "rlnas/search_space.hpp"

namespace rlnas {

class KeyValueConfig {
 public:
  // Throws ConfigError with the line number on syntax errors or unknown keys.
  static KeyValueConfig parse(std::string_view text);
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);  // validates the key
  void erase(const std::string& key) { values_.erase(key); }
  bool has(const std::string& key) const { return values_.contains(key); }
  std::optional<std::string> get(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }

  static const std::vector<std::string>& known_keys();

 private:
  std::map<std::string, std::string> values_;
};

enum class SkipModeChoice { kAuto, kEmpty, kIdentity };

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "rlnas_out";

  // space
  std::string space_preset = "nas_bench_201";
  int stack_depth = 2;
  std::vector<int> channels = {8};

  // data
  std::string data_source = "synthetic";
  std::filesystem::path train_path;
  std::filesystem::path val_path;
  std::size_t train_size = 1024;
  std::size_t val_size = 256;
  SyntheticSpec synthetic;

  // labels
  LabelMethod label_method = LabelMethod::kUniformOnce;
  int label_categories = 0;  // 0: the dataset's class count
  std::uint64_t label_seed = 0;
  int label_audit_iterations = 1;

  nn::TrainHyper hyper{.epochs = 2};

  // search
  FitnessKind fitness = FitnessKind::kAngle;
  EvolutionConfig evo;
  std::uint64_t flops_budget = 0;  // 0: unconstrained
  SkipModeChoice angle_mode = SkipModeChoice::kAuto;
  Comparison angle_comparison = Comparison::kInitVsTrained;
  std::filesystem::path snapshot_path;  // empty: <out>/snapshot.rlns

  // benchmark and analyses
  std::filesystem::path bench_path;
  std::string bench_tag = "synthetic";
  AccField rank_by = AccField::kTest;
  std::vector<char> methods = {'D'};
  std::string baseline_kind = "random_search";
  int baseline_samples = 100;
  std::vector<int> sweep_categories;
  std::string fixture_kind = "synthetic";
  std::uint64_t fixture_max_archs = 512;

  // Derived seeds, resolved from `seed` unless set explicitly.
  std::uint64_t data_seed = 0;
  std::uint64_t init_seed = 0;
  std::uint64_t train_seed = 0;
  std::uint64_t second_init_seed = 0;
  std::uint64_t baseline_seed = 0;

  // Canonical "key=value" listing of every resolved setting.
  std::string canonical;
  std::string config_hash;  // 16 hex digits of FNV-1a over `canonical`

  SearchSpace space() const;
  SkipMode skip_mode(const SearchSpace& space) const;
  std::filesystem::path resolved_snapshot_path() const;
  int classifier_width() const;  // synthetic classes or label categories, whichever is larger
};

// Resolves defaults, derived seeds and validation. Field-level problems
// throw ConfigError naming the key.
ExperimentConfig resolve_config(const KeyValueConfig& kv);

// "10:200:10" (inclusive range) or "10,20,30".
std::vector<int> parse_int_list(std::string_view key, std::string_view text);

}  // namespace rlnas

#endif  // RLNAS_CONFIG_HPP

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

#ifndef RLNAS_ORCHESTRATOR_HPP
#define RLNAS_ORCHESTRATOR_HPP

/*
 * Experiment driver behind the `rlnas` command line.
 *
 *   rlnas train|search|rank-eval|baseline|labels|sweep-categories|make-bench
 *         [--config FILE] [--seed N] [--out DIR] [--set key=value ...]
 *
 * Every subcommand writes its artifacts under the output directory. CSV
 * artifacts start with a "# config_hash=... seed=..." line, JSON artifacts
 * carry the same two fields.
 */

#include <iosfwd>
#include <string>
#include <vector>

#include "rlnas/bench.hpp"
#include "rlnas/config.hpp"
#include "rlnas/dataset.hpp"
#include "rlnas/labels.hpp"
#include "rlnas/supernet.hpp"

namespace rlnas {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

// Parses arguments (without the program name), runs the subcommand and maps
// errors to exit codes. Progress goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Builds the resolved configuration the CLI would use for these overrides.
ExperimentConfig load_experiment(const std::string& config_path,
                                 const std::vector<std::string>& sets,
                                 const std::string& seed, const std::string& out_dir);

// Dataset splits: 0 train, 1 validation, 2 test.
Dataset load_split(const ExperimentConfig& cfg, int split);

// Label source of the configured method over `train`. A ground-truth method
// forced by `ground_truth` overrides the configured one.
LabelSource make_label_source(const ExperimentConfig& cfg, const Dataset& train,
                              bool ground_truth = false);

Snapshot train_from_config(const ExperimentConfig& cfg, const Dataset& train,
                           const LabelSource& labels, int classifier_width, std::ostream& log);

void cmd_train(const ExperimentConfig& cfg, std::ostream& log);
void cmd_search(const ExperimentConfig& cfg, std::ostream& log);
void cmd_rank_eval(const ExperimentConfig& cfg, std::ostream& log);
void cmd_baseline(const ExperimentConfig& cfg, std::ostream& log);
void cmd_labels(const ExperimentConfig& cfg, std::ostream& log);
void cmd_sweep_categories(const ExperimentConfig& cfg, std::ostream& log);
void cmd_make_bench(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace rlnas

#endif  // RLNAS_ORCHESTRATOR_HPP

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

#include "rlnas/orchestrator.hpp"

#include <algorithm>
#include <map>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "rlnas/angle.hpp"
#include "rlnas/byte_io.hpp"
#include "rlnas/errors.hpp"
#include "rlnas/evolution.hpp"
#include "rlnas/snapshot_io.hpp"

namespace rlnas {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kDerivedSeedKeys[] = {"data.seed",  "train.init_seed", "train.seed",
                                            "label.seed", "evo.seed",        "angle.init_seed",
                                            "baseline.seed"};

std::string csv_header(const ExperimentConfig& cfg) {
  return fmt::format("# config_hash={} seed={}\n", cfg.config_hash, cfg.seed);
}

Json json_header(const ExperimentConfig& cfg) {
  Json j;
  j["config_hash"] = cfg.config_hash;
  j["seed"] = cfg.seed;
  return j;
}

void write_json(const std::filesystem::path& path, const Json& j) {
  io::write_text(path, j.dump(2) + "\n");
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

BenchTable require_bench(const ExperimentConfig& cfg, std::string_view what) {
  if (cfg.bench_path.empty())
    throw ConfigError(fmt::format(
        "bench.path: {} needs a benchmark table (generate one with `rlnas make-bench`)", what));
  if (!std::filesystem::exists(cfg.bench_path))
    throw ConfigError(fmt::format("bench.path: {} does not exist", cfg.bench_path.string()));
  return load_bench(cfg.bench_path);
}

Snapshot require_snapshot(const ExperimentConfig& cfg) {
  const auto path = cfg.resolved_snapshot_path();
  if (!std::filesystem::exists(path))
    throw ConfigError(fmt::format(
        "snapshot.path: no snapshot at {}; run `rlnas train` with the same config first or "
        "point snapshot.path at an existing file",
        path.string()));
  Snapshot snap = load_snapshot(path);
  const auto sidecar = std::filesystem::path(path).replace_extension(".json");
  if (std::filesystem::exists(sidecar)) {
    const auto bytes = io::read_file(sidecar);
    const auto j = Json::parse(bytes.begin(), bytes.end());
    const auto expected = space_hash(cfg.space());
    if (j.value("space_hash", expected) != expected)
      throw ConfigError(fmt::format("snapshot.path: {} was trained on a different search space",
                                    path.string()));
  }
  return snap;
}

int classifier_width_of(const SuperNetWeights& w) { return w.at("classifier.weight").dim(0); }

bool has_weighted_path(const SearchSpace& space, const ArchEncoding& enc, SkipMode mode) {
  for (const Path& p : enumerate_paths(space, enc))
    for (int e : p)
      if (space.op(enc, static_cast<std::size_t>(e)).type != OpType::kSkip ||
          mode == SkipMode::kIdentity)
        return true;
  return false;
}

Constraint combine(Constraint a, Constraint b) {
  if (!a) return b;
  if (!b) return a;
  return [a = std::move(a), b = std::move(b)](const ArchEncoding& e) { return a(e) && b(e); };
}

Constraint flops_constraint(const ExperimentConfig& cfg, const SearchSpace& space, int width) {
  if (cfg.flops_budget == 0) return {};
  const InputShape shape{3, cfg.synthetic.height, cfg.synthetic.width};
  return [&space, shape, width, budget = cfg.flops_budget](const ArchEncoding& e) {
    return flops_estimate(space, e, shape, width) <= budget;
  };
}

// Weight stores compared by the angle metric. For init-vs-init no training
// is needed: both sides are fresh initializations.
struct AnglePair {
  Snapshot snap;
  SuperNetWeights other;
};

AnglePair angle_operands(const ExperimentConfig& cfg, const SearchSpace& space) {
  AnglePair p;
  if (cfg.angle_comparison == Comparison::kInitVsInit) {
    const HeadConfig head{3, cfg.classifier_width()};
    p.snap.initial = init_supernet(space, cfg.init_seed, head);
    p.snap.current = p.snap.initial;
    p.other = init_supernet(space, cfg.second_init_seed, head);
  } else {
    p.snap = require_snapshot(cfg);
  }
  return p;
}

double angle_of(const SearchSpace& space, const AnglePair& p, const ArchEncoding& e,
                SkipMode mode, Comparison cmp) {
  return compute_angle(space, e, p.snap, mode, cmp, cmp == Comparison::kInitVsInit ? &p.other : nullptr);
}

EvolutionResult run_evolution(const ExperimentConfig& cfg, const SearchSpace& space,
                              FitnessFn fitness, Constraint extra, int width) {
  EvolutionConfig evo = cfg.evo;
  evo.constraint = combine(flops_constraint(cfg, space, width), std::move(extra));
  return evolve(space, fitness, evo);
}

std::string ranked_csv(const ExperimentConfig& cfg, const EvolutionResult& r) {
  std::string out = csv_header(cfg) + "rank,arch,fitness\n";
  for (std::size_t i = 0; i < r.ranked.size(); ++i)
    out += fmt::format("{},{},{}\n", i + 1, r.ranked[i].arch, num(r.ranked[i].fitness));
  return out;
}

Json encoding_json(const ArchEncoding& e) { return Json(e.choices); }

}  // namespace

ExperimentConfig load_experiment(const std::string& config_path,
                                 const std::vector<std::string>& sets, const std::string& seed,
                                 const std::string& out_dir) {
  KeyValueConfig kv = config_path.empty() ? KeyValueConfig{} : KeyValueConfig::load(config_path);
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError(fmt::format("--set expects key=value, got '{}'", s));
    kv.set(s.substr(0, eq), s.substr(eq + 1));
  }
  if (!seed.empty()) {
    kv.set("run.seed", seed);
    for (const char* k : kDerivedSeedKeys) kv.erase(k);
  }
  if (!out_dir.empty()) kv.set("run.out", out_dir);
  return resolve_config(kv);
}

Dataset load_split(const ExperimentConfig& cfg, int split) {
  if (cfg.data_source == "file") {
    const auto& path = split == 0 ? cfg.train_path : cfg.val_path;
    if (path.empty())
      throw ConfigError("data.val_path: a validation file is required for this command");
    return load_raw_dataset(path);
  }
  const std::size_t n = split == 0 ? cfg.train_size : cfg.val_size;
  return make_synthetic(cfg.synthetic, n, static_cast<std::uint64_t>(split));
}

LabelSource make_label_source(const ExperimentConfig& cfg, const Dataset& train,
                              bool ground_truth) {
  const LabelMethod method = ground_truth ? LabelMethod::kGroundTruth : cfg.label_method;
  const bool uniform = method == LabelMethod::kUniformOnce || method == LabelMethod::kUniformPerIter;
  const int categories = uniform && cfg.label_categories > 0 ? cfg.label_categories : train.num_classes;
  return LabelSource(method, categories, cfg.label_seed, train.labels);
}

Snapshot train_from_config(const ExperimentConfig& cfg, const Dataset& train,
                           const LabelSource& labels, int classifier_width, std::ostream& log) {
  const SearchSpace space = cfg.space();
  const HeadConfig head{train.channels(), classifier_width};
  const SuperNetWeights initial = init_supernet(space, cfg.init_seed, head);
  Rng rng(cfg.train_seed);
  Snapshot snap = train_supernet(space, initial, train, labels, cfg.hyper, rng);
  for (std::size_t e = 0; e < snap.log.size(); ++e)
    fmt::print(log, "epoch {:>3}  loss {:.6f}  lr {:.6f}\n", e + 1, snap.log[e].mean_loss,
               snap.log[e].lr);
  return snap;
}

void cmd_train(const ExperimentConfig& cfg, std::ostream& log) {
  const Dataset train = load_split(cfg, 0);
  const LabelSource labels = make_label_source(cfg, train);
  const int width = std::max(cfg.classifier_width(), train.num_classes);
  const Snapshot snap = train_from_config(cfg, train, labels, width, log);

  const auto path = cfg.resolved_snapshot_path();
  save_snapshot(path, snap);
  Json j = json_header(cfg);
  j["space"] = cfg.space().describe();
  j["space_hash"] = snap.current.meta.space_hash;
  j["init_seed"] = snap.current.meta.seed;
  j["schema_version"] = snap.current.meta.schema_version;
  j["label_method"] = to_string(labels.method());
  j["label_categories"] = labels.num_categories();
  j["classifier_width"] = width;
  Json epochs = Json::array();
  for (const auto& e : snap.log) epochs.push_back({{"mean_loss", e.mean_loss}, {"lr", e.lr}});
  j["log"] = epochs;
  j["config"] = cfg.canonical;
  write_json(std::filesystem::path(path).replace_extension(".json"), j);
  fmt::print(log, "wrote {}\n", path.string());
}

void cmd_search(const ExperimentConfig& cfg, std::ostream& log) {
  const SearchSpace space = cfg.space();
  FitnessFn fitness{cfg.fitness, {}};
  Constraint extra;
  int width = cfg.classifier_width();

  AnglePair angle;
  Snapshot trained;
  Dataset val;
  BenchTable table;
  const SkipMode mode = cfg.skip_mode(space);
  switch (cfg.fitness) {
    case FitnessKind::kAngle:
      angle = angle_operands(cfg, space);
      width = classifier_width_of(angle.snap.initial);
      fitness.score = [&](const ArchEncoding& e) {
        return angle_of(space, angle, e, mode, cfg.angle_comparison);
      };
      extra = [&](const ArchEncoding& e) { return has_weighted_path(space, e, mode); };
      break;
    case FitnessKind::kValAcc:
      trained = require_snapshot(cfg);
      width = classifier_width_of(trained.current);
      val = load_split(cfg, 1);
      fitness.score = [&](const ArchEncoding& e) {
        return eval_val_acc(space, e, trained.current, val);
      };
      break;
    case FitnessKind::kTabular:
      table = require_bench(cfg, "search.fitness = tabular");
      fitness.score = [&](const ArchEncoding& e) {
        return table.entry(encode_str(space, e), cfg.bench_tag).val_acc;
      };
      break;
    case FitnessKind::kCustom:
      throw ConfigError("search.fitness: custom fitness is library-only");
  }

  const EvolutionResult r = run_evolution(cfg, space, fitness, extra, width);
  io::write_text(cfg.out_dir / "search_results.csv", ranked_csv(cfg, r));

  const Scored& best = r.ranked.front();
  Json j = json_header(cfg);
  j["arch"] = best.arch;
  j["encoding"] = encoding_json(best.encoding);
  j["fitness_kind"] = to_string(cfg.fitness);
  j["fitness"] = best.fitness;
  j["evaluations"] = r.evaluations;
  j["generation_best"] = r.generation_best;
  if (cfg.fitness == FitnessKind::kAngle) {
    j["angle_mode"] = mode == SkipMode::kEmpty ? "empty_skip" : "identity_skip";
    j["angle_comparison"] =
        cfg.angle_comparison == Comparison::kInitVsInit ? "init_vs_init" : "init_vs_trained";
  }
  if (!cfg.bench_path.empty() && std::filesystem::exists(cfg.bench_path)) {
    if (table.empty()) table = load_bench(cfg.bench_path);
    if (const auto* rec = table.find(best.arch); rec && rec->by_tag.contains(cfg.bench_tag)) {
      j["bench_val_acc"] = rec->by_tag.at(cfg.bench_tag).val_acc;
      j["bench_test_acc"] = rec->by_tag.at(cfg.bench_tag).test_acc;
    }
  }
  write_json(cfg.out_dir / "best_arch.json", j);
  fmt::print(log, "best {} fitness {} after {} evaluations\n", best.arch, num(best.fitness),
             r.evaluations);
}

void cmd_rank_eval(const ExperimentConfig& cfg, std::ostream& log) {
  const SearchSpace space = cfg.space();
  const BenchTable table = require_bench(cfg, "rank-eval");
  const SkipMode mode = cfg.skip_mode(space);
  const Dataset train = load_split(cfg, 0);
  const int width = std::max(cfg.classifier_width(), train.num_classes);

  // One SuperNet per label type, shared by both indicators.
  std::map<bool, Snapshot> trained;
  auto snapshot_for = [&](bool gt) -> const Snapshot& {
    auto it = trained.find(gt);
    if (it == trained.end()) {
      ExperimentConfig c = cfg;
      if (!gt && c.label_method == LabelMethod::kGroundTruth) c.label_method = LabelMethod::kUniformOnce;
      fmt::print(log, "training SuperNet with {} labels\n", gt ? "ground-truth" : "random");
      it = trained.emplace(gt, train_from_config(c, train, make_label_source(c, train, gt), width, log))
               .first;
    }
    return it->second;
  };

  std::vector<std::string> all;
  for (const auto& e : all_encodings(space)) all.push_back(encode_str(space, e));
  const RankList truth = table_rank(table, all, cfg.bench_tag, cfg.rank_by);

  Dataset val;
  bool have_val = false;
  std::string summary = csv_header(cfg) + "method,label_type,indicator,kendall_tau,failed\n";
  Json j = json_header(cfg);
  Json methods = Json::array();
  for (char m : cfg.methods) {
    const bool gt = m == 'A' || m == 'B';
    const bool use_angle = m == 'B' || m == 'D';
    const Snapshot& snap = snapshot_for(gt);
    Metric metric;
    if (use_angle) {
      metric = [&](const ArchEncoding& e) { return compute_angle(space, e, snap.initial, snap.current, mode); };
    } else {
      if (!have_val) {
        val = load_split(cfg, 1);
        have_val = true;
      }
      metric = [&](const ArchEncoding& e) { return eval_val_acc(space, e, snap.current, val); };
    }
    const RankReport report = rank_all(space, metric, cfg.evo.threads);
    const double tau = kendall_tau(report.order, truth);
    io::write_text(cfg.out_dir / fmt::format("rank_{}.csv", m),
                   csv_header(cfg) + rank_report_csv(report, truth));
    const char* label_type = gt ? "ground_truth" : "random";
    const char* indicator = use_angle ? "angle" : "val_acc";
    summary += fmt::format("{},{},{},{},{}\n", m, label_type, indicator, num(tau), report.failed.size());
    methods.push_back({{"method", std::string(1, m)},
                       {"label_type", label_type},
                       {"indicator", indicator},
                       {"kendall_tau", tau},
                       {"failed", report.failed.size()}});
    fmt::print(log, "method {} ({} labels, {}): tau {:.4f}\n", m, label_type, indicator, tau);
  }
  j["rank_by"] = cfg.rank_by == AccField::kTest ? "test" : "val";
  j["methods"] = methods;
  io::write_text(cfg.out_dir / "rank_eval.csv", summary);
  write_json(cfg.out_dir / "rank_eval.json", j);
}

void cmd_baseline(const ExperimentConfig& cfg, std::ostream& log) {
  const SearchSpace space = cfg.space();
  const BenchTable table = require_bench(cfg, "baseline");
  Json j = json_header(cfg);
  j["kind"] = cfg.baseline_kind;
  std::string arch;
  if (cfg.baseline_kind == "random_search") {
    const BaselinePick pick =
        random_search_baseline(space, table, cfg.baseline_samples, cfg.bench_tag, cfg.baseline_seed);
    arch = pick.arch;
    j["samples"] = cfg.baseline_samples;
  } else {
    // Angle between two independent initializations; nothing is trained.
    ExperimentConfig c = cfg;
    c.angle_comparison = Comparison::kInitVsInit;
    const AnglePair operands = angle_operands(c, space);
    const SkipMode mode = cfg.skip_mode(space);
    FitnessFn fitness{FitnessKind::kAngle, [&](const ArchEncoding& e) {
                        return angle_of(space, operands, e, mode, Comparison::kInitVsInit);
                      }};
    const EvolutionResult r = run_evolution(
        cfg, space, fitness,
        [&](const ArchEncoding& e) { return has_weighted_path(space, e, mode); },
        cfg.classifier_width());
    arch = r.ranked.front().arch;
    j["angle"] = r.ranked.front().fitness;
    j["evaluations"] = r.evaluations;
  }
  const BenchEntry& entry = table.entry(arch, cfg.bench_tag);
  j["arch"] = arch;
  j["val_acc"] = entry.val_acc;
  j["test_acc"] = entry.test_acc;
  write_json(cfg.out_dir / "baseline.json", j);
  fmt::print(log, "{} baseline picked {} (val {:.2f}, test {:.2f})\n", cfg.baseline_kind, arch,
             entry.val_acc, entry.test_acc);
}

void cmd_labels(const ExperimentConfig& cfg, std::ostream& log) {
  const Dataset train = load_split(cfg, 0);
  const LabelSource src = make_label_source(cfg, train);
  std::vector<std::vector<int>> columns;
  for (int it = 0; it < cfg.label_audit_iterations; ++it) columns.push_back(src.assignment(it));
  std::string out = csv_header(cfg) + "index,ground_truth";
  for (int it = 0; it < cfg.label_audit_iterations; ++it) out += fmt::format(",iter{}", it);
  out += "\n";
  for (std::size_t i = 0; i < train.size(); ++i) {
    out += fmt::format("{},{}", i, train.labels[i]);
    for (const auto& col : columns) out += fmt::format(",{}", col[i]);
    out += "\n";
  }
  io::write_text(cfg.out_dir / "labels.csv", out);
  fmt::print(log, "wrote {} labels ({}, C={})\n", train.size(), to_string(src.method()),
             src.num_categories());
}

void cmd_sweep_categories(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.sweep_categories.empty()) throw ConfigError("sweep.categories: list is empty");
  const SearchSpace space = cfg.space();
  const BenchTable table = require_bench(cfg, "sweep-categories");
  const SkipMode mode = cfg.skip_mode(space);
  const Dataset train = load_split(cfg, 0);
  const int width = std::max(train.num_classes,
                             *std::max_element(cfg.sweep_categories.begin(), cfg.sweep_categories.end()));

  std::vector<std::string> all;
  for (const auto& e : all_encodings(space)) all.push_back(encode_str(space, e));
  const RankList truth = table_rank(table, all, cfg.bench_tag, cfg.rank_by);
  const auto sources = category_sweep_config(cfg.sweep_categories, train.size(), cfg.label_seed);

  std::string csv = csv_header(cfg) + "categories,kendall_tau,best_arch,best_test_acc\n";
  Json j = json_header(cfg);
  Json rows = Json::array();
  for (const LabelSource& src : sources) {
    fmt::print(log, "C={}\n", src.num_categories());
    const Snapshot snap = train_from_config(cfg, train, src, width, log);
    auto angle = [&](const ArchEncoding& e) {
      return compute_angle(space, e, snap.initial, snap.current, mode);
    };
    const RankReport report = rank_all(space, angle, cfg.evo.threads);
    const double tau = kendall_tau(report.order, truth);
    const EvolutionResult r = run_evolution(
        cfg, space, FitnessFn{FitnessKind::kAngle, angle},
        [&](const ArchEncoding& e) { return has_weighted_path(space, e, mode); }, width);
    const std::string& best = r.ranked.front().arch;
    const double test = table.entry(best, cfg.bench_tag).test_acc;
    csv += fmt::format("{},{},{},{}\n", src.num_categories(), num(tau), best, num(test));
    rows.push_back({{"categories", src.num_categories()},
                    {"kendall_tau", tau},
                    {"best_arch", best},
                    {"best_test_acc", test}});
  }
  j["sweep"] = rows;
  io::write_text(cfg.out_dir / "sweep.csv", csv);
  write_json(cfg.out_dir / "sweep.json", j);
}

void cmd_make_bench(const ExperimentConfig& cfg, std::ostream& log) {
  const SearchSpace space = cfg.space();
  const auto path = cfg.bench_path.empty() ? cfg.out_dir / "bench.txt" : cfg.bench_path;
  BenchTable table;
  if (cfg.fixture_kind == "synthetic") {
    table = synthetic_bench(space, cfg.bench_tag, cfg.data_seed);
  } else {
    const auto n = space_size(space);
    if (n > cfg.fixture_max_archs)
      throw ConfigError(fmt::format(
          "fixture.max_archs: standalone training of {} architectures exceeds the limit {}", n,
          cfg.fixture_max_archs));
    const Dataset train = load_split(cfg, 0);
    const Dataset val = load_split(cfg, 1);
    const Dataset test = make_synthetic(cfg.synthetic, cfg.val_size, 2);
    const LabelSource labels = make_label_source(cfg, train, true);
    for (const ArchEncoding& enc : all_encodings(space)) {
      SearchSpace fixed = space;
      for (std::size_t e = 0; e < space.num_edges(); ++e) fixed.alternatives[e] = {space.op(enc, e)};
      const ArchEncoding only(std::vector<int>(space.num_edges(), 0));
      const SuperNetWeights init = init_supernet(fixed, cfg.init_seed, {train.channels(), train.num_classes});
      Rng rng(cfg.train_seed);
      const Snapshot snap = train_supernet(fixed, init, train, labels, cfg.hyper, rng);
      BenchEntry entry;
      entry.val_acc = 100.0 * eval_val_acc(fixed, only, snap.current, val);
      entry.test_acc = 100.0 * eval_val_acc(fixed, only, snap.current, test);
      table.add(encode_str(space, enc), cfg.bench_tag, entry);
    }
  }
  io::write_text(path, fmt::format("# rlnas {} benchmark config_hash={} seed={}\n",
                                   cfg.fixture_kind, cfg.config_hash, cfg.seed) +
                           format_bench(table));
  fmt::print(log, "wrote {} records to {}\n", table.size(), path.string());
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random-label SuperNet training and angle-based architecture search", "rlnas"};
  app.require_subcommand(1);
  std::string config_path, seed, out_dir;
  std::vector<std::string> sets;

  using Cmd = void (*)(const ExperimentConfig&, std::ostream&);
  const std::vector<std::tuple<const char*, const char*, Cmd>> commands = {
      {"train", "train a SuperNet and write a W0/Wt snapshot", cmd_train},
      {"search", "evolutionary search with angle, val_acc or tabular fitness", cmd_search},
      {"rank-eval", "Kendall tau of metric ranks against a benchmark table", cmd_rank_eval},
      {"baseline", "random-search or training-free baseline", cmd_baseline},
      {"labels", "dump the label assignment for audit", cmd_labels},
      {"sweep-categories", "tau and best test accuracy per random-label category count",
       cmd_sweep_categories},
      {"make-bench", "generate a benchmark table fixture", cmd_make_bench},
  };
  std::map<const CLI::App*, Cmd> handlers;
  for (const auto& [name, desc, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "key-value config file");
    sub->add_option("--seed", seed, "base seed; replaces every derived seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--set", sets, "override one config key (key=value)");
    handlers[sub] = fn;
  }

  std::vector<const char*> argv{"rlnas"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    const ExperimentConfig cfg = load_experiment(config_path, sets, seed, out_dir);
    for (const auto& [sub, fn] : handlers)
      if (sub->parsed()) fn(cfg, out);
  } catch (const ConfigError& e) {
    fmt::print(err, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace rlnas

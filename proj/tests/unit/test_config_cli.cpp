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


#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"
#include "rlnas/angle.hpp"
#include "rlnas/byte_io.hpp"
#include "rlnas/config.hpp"
#include "rlnas/errors.hpp"
#include "rlnas/orchestrator.hpp"
#include "rlnas/snapshot_io.hpp"
#include "rlnas/supernet.hpp"

namespace rlnas {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  const auto b = io::read_file(p);
  return std::string(b.begin(), b.end());
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

TEST(KeyValueConfig, SectionsCommentsAndDottedKeys) {
  const auto kv = KeyValueConfig::parse(
      "# top\n"
      "run.seed = 7\n"
      "[train]\n"
      "epochs = 3   \n"
      "\n"
      "label.method = shuffle_once\n");
  EXPECT_EQ(kv.get("run.seed"), "7");
  EXPECT_EQ(kv.get("train.epochs"), "3");
  EXPECT_EQ(kv.get("label.method"), "shuffle_once");
  EXPECT_FALSE(kv.get("train.lr_max").has_value());
}

TEST(KeyValueConfig, Errors) {
  EXPECT_THROW(KeyValueConfig::parse("train.epoch = 3\n"), ConfigError);
  EXPECT_THROW(KeyValueConfig::parse("no equals sign\n"), ConfigError);
  EXPECT_THROW(KeyValueConfig::parse("[train\n"), ConfigError);
  try {
    KeyValueConfig::parse("run.seed = 1\nbogus.key = 2\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

ExperimentConfig resolve(std::initializer_list<std::pair<const char*, const char*>> sets) {
  KeyValueConfig kv;
  for (const auto& [k, v] : sets) kv.set(k, v);
  return resolve_config(kv);
}

void expect_key_error(std::initializer_list<std::pair<const char*, const char*>> sets,
                      const std::string& key) {
  try {
    resolve(sets);
    FAIL() << "accepted bad " << key;
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(key), std::string::npos) << e.what();
  }
}

TEST(ResolveConfig, BadValuesNameTheKey) {
  expect_key_error({{"train.epochs", "-1"}}, "train.epochs");
  expect_key_error({{"train.epochs", "two"}}, "train.epochs");
  expect_key_error({{"train.lr_max", "1e-3x"}}, "train.lr_max");
  expect_key_error({{"space.preset", "resnet"}}, "space.preset");
  expect_key_error({{"label.method", "random"}}, "label.method");
  expect_key_error({{"evo.population", "10"}}, "evo");
  expect_key_error({{"rank.methods", "AE"}}, "rank.methods");
}

TEST(ResolveConfig, DefaultsAndDerivedSeeds) {
  const auto a = resolve({{"run.seed", "11"}});
  const auto b = resolve({{"run.seed", "12"}});
  EXPECT_EQ(a.seed, 11u);
  EXPECT_NE(a.init_seed, a.second_init_seed);
  EXPECT_NE(a.init_seed, b.init_seed);
  EXPECT_NE(a.config_hash, b.config_hash);
  EXPECT_EQ(a.config_hash.size(), 16u);
  const auto c = resolve({{"run.seed", "11"}, {"run.out", "elsewhere"}});
  EXPECT_EQ(a.config_hash, c.config_hash);
  const auto d = resolve({{"run.seed", "11"}, {"train.init_seed", "99"}});
  EXPECT_EQ(d.init_seed, 99u);
  EXPECT_EQ(d.train_seed, a.train_seed);
}

TEST(ResolveConfig, SpaceChannels) {
  const auto one = resolve({{"space.stack_depth", "3"}, {"space.channels", "6"}}).space();
  EXPECT_EQ(one.stack_depth, 3);
  EXPECT_EQ(one.channels, (std::vector<int>{6, 6, 6}));
  const auto per = resolve({{"space.stack_depth", "2"}, {"space.channels", "4,8"}}).space();
  EXPECT_EQ(per.channels, (std::vector<int>{4, 8}));
}

TEST(ParseIntList, RangeAndList) {
  EXPECT_EQ(parse_int_list("k", "10:50:10"), (std::vector<int>{10, 20, 30, 40, 50}));
  EXPECT_EQ(parse_int_list("k", "3,1,2"), (std::vector<int>{3, 1, 2}));
  EXPECT_EQ(parse_int_list("k", "10:200:10").size(), 20u);
  EXPECT_THROW(parse_int_list("k", "10:5:1"), ConfigError);
  EXPECT_THROW(parse_int_list("k", "1,,2"), ConfigError);
  EXPECT_THROW(parse_int_list("k", "1:5:0"), ConfigError);
}

TEST(LoadExperiment, SeedFlagReplacesDerivedSeeds) {
  const auto cfg = load_experiment("", {"train.init_seed=5", "run.seed=1"}, "42", "o");
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_NE(cfg.init_seed, 5u);
  EXPECT_EQ(cfg.init_seed, resolve({{"run.seed", "42"}}).init_seed);
  EXPECT_EQ(cfg.out_dir, fs::path("o"));
  EXPECT_THROW(load_experiment("", {"novalue"}, "", ""), ConfigError);
}

// Small toy3 experiment shared by the CLI tests.
class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            fmt::format("rlnas_cli_{}", ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
    config_ = root_ / "exp.cfg";
    io::write_text(config_,
                   "run.seed = 3\n"
                   "[space]\npreset = toy3\nstack_depth = 2\nchannels = 4\n"
                   "[data]\ntrain_size = 96\nval_size = 64\nheight = 6\nwidth = 6\nclasses = 4\n"
                   "[train]\nepochs = 1\nbatch_size = 16\n"
                   "[evo]\npopulation = 8\ntop_k = 4\ncrossover_count = 2\nmutation_count = 2\n"
                   "iterations = 3\n");
  }
  void TearDown() override { fs::remove_all(root_); }

  int run(std::vector<std::string> args, const fs::path& out) {
    args.insert(args.end(), {"--config", config_.string(), "--out", out.string()});
    out_.str("");
    err_.str("");
    return run_cli(args, out_, err_);
  }

  fs::path root_, config_;
  std::ostringstream out_, err_;
};

TEST_F(Cli, UsageErrorsExitWithConfigCode) {
  std::ostringstream o, e;
  EXPECT_EQ(run_cli({}, o, e), kExitConfig);
  EXPECT_EQ(run_cli({"fly"}, o, e), kExitConfig);
  EXPECT_EQ(run_cli({"train", "--bogus"}, o, e), kExitConfig);
  EXPECT_EQ(run({"train", "--set", "train.epochs=x"}, root_ / "a"), kExitConfig);
  EXPECT_NE(err_.str().find("train.epochs"), std::string::npos);
  EXPECT_EQ(run_cli({"train", "--config", (root_ / "missing.cfg").string()}, o, e), kExitConfig);
}

TEST_F(Cli, SearchWithoutSnapshotIsActionable) {
  EXPECT_EQ(run({"search"}, root_ / "nosnap"), kExitConfig);
  EXPECT_NE(err_.str().find("rlnas train"), std::string::npos) << err_.str();
}

TEST_F(Cli, RuntimeFailureExitsWithRuntimeCode) {
  EXPECT_EQ(run({"train", "--set", "train.lr_max=1e30", "--set", "train.lr_min=1e29"}, root_ / "div"),
            kExitRuntime);
  EXPECT_FALSE(err_.str().empty());
}

TEST_F(Cli, TrainAndSearchAreByteIdenticalAcrossOutputDirs) {
  for (const char* d : {"r1", "r2"}) {
    ASSERT_EQ(run({"train"}, root_ / d), kExitOk) << err_.str();
    ASSERT_EQ(run({"search"}, root_ / d), kExitOk) << err_.str();
  }
  for (const char* f : {"snapshot.rlns", "search_results.csv", "best_arch.json"})
    EXPECT_EQ(slurp(root_ / "r1" / f), slurp(root_ / "r2" / f)) << f;
  const auto csv = slurp(root_ / "r1" / "search_results.csv");
  EXPECT_EQ(csv.rfind("# config_hash=", 0), 0u);

  // The reported fitness is the angle recomputed from the snapshot.
  const auto best = read_json(root_ / "r1" / "best_arch.json");
  const auto cfg = load_experiment(config_.string(), {}, "", (root_ / "r1").string());
  EXPECT_EQ(best["config_hash"], cfg.config_hash);
  EXPECT_EQ(best["seed"], 3);
  const auto space = cfg.space();
  const Snapshot snap = load_snapshot(root_ / "r1" / "snapshot.rlns");
  const auto enc = decode_str(best["arch"].get<std::string>(), space);
  EXPECT_EQ(best["fitness"].get<double>(),
            compute_angle(space, enc, snap.initial, snap.current, cfg.skip_mode(space)));

  const auto meta = read_json(root_ / "r1" / "snapshot.json");
  EXPECT_EQ(meta["log"].size(), 1u);
  EXPECT_EQ(meta["space_hash"], space_hash(space));
}

TEST_F(Cli, SeedChangesTheSnapshot) {
  ASSERT_EQ(run({"train"}, root_ / "a"), kExitOk);
  ASSERT_EQ(run({"train", "--seed", "4"}, root_ / "b"), kExitOk);
  EXPECT_NE(slurp(root_ / "a" / "snapshot.rlns"), slurp(root_ / "b" / "snapshot.rlns"));
}

TEST_F(Cli, SnapshotFromAnotherSpaceIsRejected) {
  ASSERT_EQ(run({"train"}, root_ / "a"), kExitOk);
  EXPECT_EQ(run({"search", "--set", "space.channels=6"}, root_ / "a"), kExitConfig);
  EXPECT_NE(err_.str().find("different search space"), std::string::npos) << err_.str();
}

TEST_F(Cli, InitVsInitSearchNeedsNoSnapshot) {
  ASSERT_EQ(run({"search", "--set", "angle.comparison=init_vs_init"}, root_ / "a"), kExitOk)
      << err_.str();
  EXPECT_TRUE(fs::exists(root_ / "a" / "best_arch.json"));
}

TEST_F(Cli, RankEvalEmitsOneTauPerMethod) {
  const auto bench = (root_ / "bench.txt").string();
  ASSERT_EQ(run({"make-bench", "--set", "bench.path=" + bench}, root_ / "a"), kExitOk) << err_.str();
  ASSERT_EQ(run({"rank-eval", "--set", "bench.path=" + bench, "--set", "rank.methods=ABCD"}, root_ / "a"),
            kExitOk)
      << err_.str();
  const auto j = read_json(root_ / "a" / "rank_eval.json");
  ASSERT_EQ(j["methods"].size(), 4u);
  for (const auto& m : j["methods"]) {
    const double tau = m["kendall_tau"];
    EXPECT_GE(tau, -1.0);
    EXPECT_LE(tau, 1.0);
  }
  for (const char* m : {"A", "B", "C", "D"})
    EXPECT_TRUE(fs::exists(root_ / "a" / fmt::format("rank_{}.csv", m))) << m;
}

TEST_F(Cli, StandaloneFixtureCoversTheSpace) {
  const auto bench = root_ / "standalone.txt";
  ASSERT_EQ(run({"make-bench", "--set", "fixture.kind=standalone", "--set", "bench.path=" + bench.string()},
                root_ / "a"),
            kExitOk)
      << err_.str();
  EXPECT_EQ(load_bench(bench).size(), 27u);
  EXPECT_EQ(run({"make-bench", "--set", "fixture.kind=standalone", "--set", "fixture.max_archs=10"},
                root_ / "a"),
            kExitConfig);
}

TEST_F(Cli, BaselinesLabelsAndSweep) {
  const auto bench = (root_ / "bench.txt").string();
  ASSERT_EQ(run({"make-bench", "--set", "bench.path=" + bench}, root_ / "a"), kExitOk);
  EXPECT_EQ(run({"baseline"}, root_ / "a"), kExitConfig);
  for (const char* kind : {"random_search", "training_free"}) {
    ASSERT_EQ(run({"baseline", "--set", "bench.path=" + bench, "--set", std::string("baseline.kind=") + kind},
                  root_ / kind),
              kExitOk)
        << err_.str();
    const auto j = read_json(root_ / kind / "baseline.json");
    EXPECT_EQ(j["kind"], kind);
    EXPECT_TRUE(load_bench(bench).find(j["arch"].get<std::string>()) != nullptr);
  }

  ASSERT_EQ(run({"labels", "--set", "label.categories=7"}, root_ / "a"), kExitOk) << err_.str();
  const auto labels = slurp(root_ / "a" / "labels.csv");
  EXPECT_EQ(labels.rfind("# config_hash=", 0), 0u);
  EXPECT_GE(std::count(labels.begin(), labels.end(), '\n'), 96);

  ASSERT_EQ(run({"sweep-categories", "--set", "bench.path=" + bench, "--set", "sweep.categories=2,5"},
                root_ / "a"),
            kExitOk)
      << err_.str();
  const auto sweep = read_json(root_ / "a" / "sweep.json");
  EXPECT_NE(sweep.dump().find("kendall_tau"), std::string::npos);
}

}  // namespace
}  // namespace rlnas

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

#include <cmath>
#include <filesystem>
#include <set>

#include "../oracles.hpp"
#include "rlnas/dataset.hpp"
#include "rlnas/errors.hpp"
#include "rlnas/labels.hpp"
#include "rlnas/snapshot_io.hpp"
#include "rlnas/supernet.hpp"

namespace rlnas {
namespace {

Dataset small_data(std::size_t n, int classes = 4, std::uint64_t seed = 1) {
  SyntheticSpec spec;
  spec.num_classes = classes;
  spec.seed = seed;
  return make_synthetic(spec, n, 0);
}

std::vector<std::size_t> first_n(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

// Cell kernels the encoding selects.
std::set<std::string> selected_kernels(const SearchSpace& space, const ArchEncoding& enc) {
  std::set<std::string> out;
  for (int c = 0; c < space.stack_depth; ++c)
    for (std::size_t e = 0; e < space.num_edges(); ++e)
      if (space.op(enc, e).has_weights()) out.insert(kernel_name(c, static_cast<int>(e), enc[e]));
  return out;
}

// Every parameter against central differences; parameters without a
// gradient entry must have a zero slope. Each element uses the largest step
// that flips no ReLU and moves no max-pool argmax; elements within 2e-3 of a
// kink are skipped, at most 10% of the network. Inputs are 4x4 to keep kinks
// sparse.
void check_network_gradients(const SearchSpace& space, const ArchEncoding& enc, std::uint64_t seed) {
  SuperNetWeights w = init_supernet(space, seed, {3, 5});
  SyntheticSpec spec;
  spec.num_classes = 5;
  spec.seed = seed;
  spec.height = spec.width = 4;
  const Dataset data = make_synthetic(spec, 3, 0);
  const auto idx = first_n(3);
  const Tensor images = data.batch(idx);
  const std::vector<int> labels = data.batch_labels(idx);
  TensorStore grads;
  loss_and_grads(space, w, enc, images, labels, grads);
  const auto pattern = activation_pattern(space, w, enc, images);
  std::size_t total = 0, checked = 0;
  for (auto& [name, t] : w.store) {
    const auto g = grads.find(name);
    std::size_t tensor_checked = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      ++total;
      double fd = 0.0;
      bool smooth = false;
      for (const float h : {1e-2f, 5e-3f, 3e-3f, 2e-3f}) {
        const float orig = t[i];
        t[i] = orig + h;
        const double up = batch_loss(space, w, enc, images, labels);
        const bool kink_up = activation_pattern(space, w, enc, images) != pattern;
        t[i] = orig - h;
        const double down = batch_loss(space, w, enc, images, labels);
        const bool kink_down = activation_pattern(space, w, enc, images) != pattern;
        t[i] = orig;
        if (kink_up || kink_down) continue;
        fd = (up - down) / (2.0 * h);
        smooth = true;
        break;
      }
      if (!smooth) continue;
      ++checked;
      ++tensor_checked;
      const double analytic = g == grads.end() ? 0.0 : g->second[i];
      EXPECT_LE(std::abs(analytic - fd), 1e-4 + 1e-2 * std::abs(fd)) << name << "[" << i << "]";
    }
    if (g != grads.end()) EXPECT_GT(tensor_checked, 0u) << name;
  }
  EXPECT_GE(checked * 10, total * 9) << checked << " of " << total << " elements away from kinks";
}

TEST(Init, DeterministicInSeed) {
  const auto space = SearchSpace::nas_bench_201(2, 4);
  const auto a = init_supernet(space, 5);
  const auto b = init_supernet(space, 5);
  const auto c = init_supernet(space, 6);
  EXPECT_EQ(a.store, b.store);
  EXPECT_NE(a.store, c.store);
  EXPECT_TRUE(a.same_keys(c));
  EXPECT_EQ(a.meta.space_hash, space_hash(space));
}

TEST(Init, TensorCountNb201Depth3) {
  const auto space = SearchSpace::nas_bench_201(3, 4);
  const auto w = init_supernet(space, 1);
  int kernels = 0;
  for (const auto& [name, t] : w.store)
    if (name.rfind("cell", 0) == 0) ++kernels;
  // 3 cells x 6 edges x {conv_1x1, conv_3x3}
  EXPECT_EQ(kernels, 3 * 6 * 2);
  EXPECT_EQ(w.store.size(), 36u + 3u);  // + stem, classifier weight and bias
  EXPECT_EQ(w.at(kernel_name(2, 5, 3)).shape(), (Shape{4, 4, 3, 3}));
  EXPECT_EQ(w.at(kernel_name(0, 0, 2)).shape(), (Shape{4, 4, 1, 1}));
  EXPECT_FALSE(w.store.contains(kernel_name(0, 0, 4)));
  EXPECT_FALSE(w.store.contains(kernel_name(0, 0, 1)));
}

TEST(Init, HeUniformBounds) {
  const auto space = SearchSpace::nas_bench_201(1, 4);
  const auto w = init_supernet(space, 3);
  const double bound = std::sqrt(6.0 / (4 * 9));
  for (float v : w.at(kernel_name(0, 0, 3)).data()) EXPECT_LE(std::abs(v), bound);
  for (float v : w.at("classifier.bias").data()) EXPECT_EQ(v, 0.0f);
}

TEST(Init, ReductionWhereChannelsChange) {
  SearchSpace space = SearchSpace::nas_bench_201(2, 4);
  space.channels = {4, 6};
  const auto w = init_supernet(space, 1);
  EXPECT_EQ(w.at("reduce1.weight").shape(), (Shape{6, 4, 1, 1}));
  EXPECT_FALSE(w.store.contains("reduce0.weight"));
  EXPECT_EQ(w.at("classifier.weight").shape(), (Shape{10, 6}));
}

TEST(Gradients, NetworkMatchesFiniteDifferences) {
  const auto space = SearchSpace::nas_bench_201(2, 4);
  check_network_gradients(space, ArchEncoding({3, 3, 3, 3, 3, 3}), 21);
  check_network_gradients(space, ArchEncoding({3, 2, 4, 1, 3, 2}), 22);
  check_network_gradients(space, ArchEncoding({2, 0, 1, 4, 1, 3}), 23);
}

TEST(Gradients, DartsLikeWithMaxPool) {
  check_network_gradients(SearchSpace::darts_like(2, 4), ArchEncoding({2, 4, 2, 3, 1}), 24);
}

TEST(Gradients, ThroughReduction) {
  SearchSpace space = SearchSpace::toy3(2, 4);
  space.channels = {3, 4};
  check_network_gradients(space, ArchEncoding({1, 2, 1}), 25);
}

TEST(Gradients, LossScaleIsLinear) {
  const auto space = SearchSpace::nas_bench_201(2, 4);
  const auto w = init_supernet(space, 2);
  const Dataset data = small_data(4);
  const auto idx = first_n(4);
  const ArchEncoding enc({3, 2, 3, 3, 1, 4});
  TensorStore g1, g2;
  loss_and_grads(space, w, enc, data.batch(idx), data.batch_labels(idx), g1, 1.0);
  loss_and_grads(space, w, enc, data.batch(idx), data.batch_labels(idx), g2, 2.0);
  ASSERT_EQ(g1.size(), g2.size());
  for (const auto& [name, t] : g1)
    for (std::size_t i = 0; i < t.size(); ++i)
      EXPECT_NEAR(g2.at(name)[i], 2.0f * t[i], 1e-6 + 1e-5 * std::abs(t[i])) << name;
}

TEST(Gradients, ZeroInputZeroCellKernelGrads) {
  const auto space = SearchSpace::nas_bench_201(2, 4);
  const auto w = init_supernet(space, 2);
  const Tensor images({2, 3, 8, 8});
  const ArchEncoding enc({3, 3, 3, 3, 3, 3});
  TensorStore grads;
  loss_and_grads(space, w, enc, images, std::vector<int>{0, 1}, grads);
  for (const auto& [name, t] : grads)
    if (name.rfind("cell", 0) == 0 || name == "stem.weight")
      for (float v : t.data()) EXPECT_EQ(v, 0.0f) << name;
}

TEST(Gradients, OnlySelectedKernelsGetGradients) {
  const auto space = SearchSpace::nas_bench_201(2, 4);
  const auto w = init_supernet(space, 2);
  const Dataset data = small_data(2);
  const auto idx = first_n(2);
  const ArchEncoding enc({3, 2, 0, 1, 4, 3});
  const auto selected = selected_kernels(space, enc);
  TensorStore grads;
  loss_and_grads(space, w, enc, data.batch(idx), data.batch_labels(idx), grads);
  for (const auto& [name, t] : grads)
    if (name.rfind("cell", 0) == 0) EXPECT_TRUE(selected.contains(name)) << name;
  EXPECT_TRUE(grads.contains(kernel_name(0, 0, 3)));
  EXPECT_TRUE(grads.contains(kernel_name(1, 5, 3)));
}

TEST(TrainStep, OffPathParametersBitwiseUnchanged) {
  const auto space = SearchSpace::nas_bench_201(2, 4);
  SuperNetWeights w = init_supernet(space, 9);
  const SuperNetWeights before = w;
  const Dataset data = small_data(8);
  const auto idx = first_n(8);
  const ArchEncoding enc({3, 0, 2, 3, 4, 2});
  const auto selected = selected_kernels(space, enc);
  TensorStore velocity;
  train_step(space, w, velocity, enc, data.batch(idx), data.batch_labels(idx), 0.1,
             nn::TrainHyper{.weight_decay = 0.01});
  for (const auto& [name, t] : w.store) {
    const bool active = selected.contains(name) || name.rfind("cell", 0) != 0;
    if (active)
      EXPECT_NE(t, before.at(name)) << name;
    else
      EXPECT_EQ(t, before.at(name)) << name;
  }
  for (const auto& [name, v] : velocity)
    if (name.rfind("cell", 0) == 0) EXPECT_TRUE(selected.contains(name)) << name;
}

TEST(Train, ZeroEpochsKeepsInitial) {
  const auto space = SearchSpace::nas_bench_201(2, 4);
  const auto w0 = init_supernet(space, 1, {3, 4});
  const Dataset data = small_data(16);
  LabelSource labels(LabelMethod::kUniformOnce, 4, 1, data.size());
  Rng rng(1);
  const auto snap = train_supernet(space, w0, data, labels, {.epochs = 0, .batch_size = 8}, rng);
  EXPECT_EQ(snap.current.store, w0.store);
  EXPECT_EQ(snap.initial.store, w0.store);
  EXPECT_TRUE(snap.log.empty());
}

TEST(Train, SingleArchitectureLossDecreases) {
  SearchSpace space = SearchSpace::toy3(1, 4);
  for (auto& alts : space.alternatives) alts = {OpKind::conv(3)};
  const auto w0 = init_supernet(space, 3, {3, 4});
  const Dataset data = small_data(128, 4, 7);
  LabelSource labels(LabelMethod::kGroundTruth, 4, 0, data.labels);
  Rng rng(2);
  const auto snap = train_supernet(space, w0, data, labels,
                                   {.lr_max = 0.05, .lr_min = 0.01, .weight_decay = 0.0, .epochs = 3, .batch_size = 16},
                                   rng);
  ASSERT_EQ(snap.log.size(), 3u);
  EXPECT_LT(snap.log[1].mean_loss, snap.log[0].mean_loss);
  EXPECT_LT(snap.log[2].mean_loss, snap.log[1].mean_loss);
  EXPECT_TRUE(snap.initial.same_keys(snap.current));
}

TEST(Train, EveryEdgeOpTouchedAfter100Steps) {
  const auto space = SearchSpace::nas_bench_201(2, 4);
  const auto w0 = init_supernet(space, 4);
  const Dataset data = small_data(400, 10);
  LabelSource labels(LabelMethod::kUniformOnce, 10, 4, data.size());
  Rng rng(4);
  const auto snap = train_supernet(space, w0, data, labels, {.epochs = 1, .batch_size = 4}, rng);
  for (const auto& [name, t] : w0.store)
    if (name.rfind("cell", 0) == 0) EXPECT_NE(snap.current.at(name), t) << name;
}

TEST(Train, SamplesOpsUniformly) {
  const auto space = SearchSpace::nas_bench_201(2, 4);
  std::vector<std::vector<long>> counts(6, std::vector<long>(5, 0));
  const auto w0 = init_supernet(space, 4);
  const Dataset data = small_data(1, 10);
  LabelSource labels(LabelMethod::kUniformOnce, 10, 4, data.size());
  // Observer sees the encoding of every step; train on a 1-sample set.
  Rng rng(8);
  long steps = 0;
  train_supernet(space, w0, data, labels, {.epochs = 2000, .batch_size = 1}, rng,
                 [&](long, const ArchEncoding& e, double) {
                   ++steps;
                   for (std::size_t i = 0; i < 6; ++i) ++counts[i][static_cast<std::size_t>(e[i])];
                 });
  EXPECT_EQ(steps, 2000);
  for (const auto& c : counts) EXPECT_GT(oracle::chi_square_p(c), 0.01);
}

TEST(Train, Errors) {
  const auto space = SearchSpace::nas_bench_201(1, 4);
  const auto w0 = init_supernet(space, 1, {3, 4});
  const Dataset data = small_data(16);
  Rng rng(1);
  LabelSource too_many(LabelMethod::kUniformOnce, 10, 1, data.size());
  EXPECT_THROW(train_supernet(space, w0, data, too_many, {.epochs = 1}, rng), ContractViolation);
  LabelSource wrong_size(LabelMethod::kUniformOnce, 4, 1, std::size_t{3});
  EXPECT_THROW(train_supernet(space, w0, data, wrong_size, {.epochs = 1}, rng), ContractViolation);
  LabelSource ok(LabelMethod::kUniformOnce, 4, 1, data.size());
  EXPECT_THROW(train_supernet(space, w0, data, ok, {.lr_max = 1e30, .lr_min = 1e29, .epochs = 20, .batch_size = 4}, rng),
               TrainingDiverged);
}

TEST(EvalValAcc, ConstantLogitsSingleClass) {
  const auto space = SearchSpace::nas_bench_201(1, 4);
  auto w = init_supernet(space, 1, {3, 4});
  w.store.at("classifier.weight").fill(0.0f);
  w.store.at("classifier.bias")[2] = 1.0f;
  Dataset val = small_data(20);
  for (auto& y : val.labels) y = 2;
  EXPECT_EQ(eval_val_acc(space, ArchEncoding({3, 3, 3, 3, 3, 3}), w, val), 1.0);
  for (auto& y : val.labels) y = 1;
  EXPECT_EQ(eval_val_acc(space, ArchEncoding({3, 3, 3, 3, 3, 3}), w, val), 0.0);
}

TEST(EvalValAcc, RandomWeightsNearChance) {
  const auto space = SearchSpace::nas_bench_201(1, 4);
  const auto w = init_supernet(space, 11, {3, 10});
  Dataset val = small_data(2000, 10, 3);
  // Labels independent of the images, balanced in expectation.
  val.labels = LabelSource(LabelMethod::kUniformOnce, 10, 6, val.size()).assignment(0);
  const ArchEncoding enc({3, 1, 2, 3, 4, 3});
  const double acc = eval_val_acc(space, enc, w, val);
  const double sigma = std::sqrt(0.1 * 0.9 / 2000);
  EXPECT_NEAR(acc, 0.1, 3 * sigma);
  EXPECT_EQ(acc, eval_val_acc(space, enc, w, val));
  EXPECT_EQ(acc, eval_val_acc(space, enc, w, val, 64));
}

TEST(EvalValAcc, EmptyValidationThrows) {
  const auto space = SearchSpace::nas_bench_201(1, 4);
  const auto w = init_supernet(space, 1);
  Dataset empty;
  empty.images = Tensor({0, 3, 8, 8});
  EXPECT_THROW(eval_val_acc(space, ArchEncoding({3, 3, 3, 3, 3, 3}), w, empty), ContractViolation);
}

Snapshot trained_snapshot() {
  const auto space = SearchSpace::nas_bench_201(2, 4);
  const auto w0 = init_supernet(space, 3);
  const Dataset data = small_data(32, 10);
  LabelSource labels(LabelMethod::kUniformOnce, 10, 3, data.size());
  Rng rng(3);
  return train_supernet(space, w0, data, labels, {.epochs = 1, .batch_size = 8}, rng);
}

TEST(SnapshotFormat, RoundTripIsBitwise) {
  const Snapshot snap = trained_snapshot();
  const auto bytes = encode_snapshot(snap);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "RLNS");
  EXPECT_EQ(bytes[4], 1);
  const Snapshot back = decode_snapshot(bytes);
  EXPECT_EQ(back.initial.store, snap.initial.store);
  EXPECT_EQ(back.current.store, snap.current.store);
  EXPECT_EQ(encode_snapshot(back), bytes);
}

TEST(SnapshotFormat, FileRoundTrip) {
  const Snapshot snap = trained_snapshot();
  const auto path = std::filesystem::temp_directory_path() / "rlnas_snapshot_test" / "s.rlns";
  save_snapshot(path, snap);
  const Snapshot back = load_snapshot(path);
  EXPECT_EQ(back.current.store, snap.current.store);
  std::filesystem::remove_all(path.parent_path());
}

TEST(SnapshotFormat, RejectsCorruption) {
  const auto bytes = encode_snapshot(trained_snapshot());
  for (std::size_t pos : {std::size_t{10}, bytes.size() / 2, bytes.size() - 1}) {
    auto bad = bytes;
    bad[pos] ^= 0x01;
    EXPECT_THROW(decode_snapshot(bad), FormatError) << pos;
  }
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_THROW(decode_snapshot(magic), FormatError);
  EXPECT_THROW(decode_snapshot(std::span(bytes).first(bytes.size() - 7)), FormatError);
  EXPECT_THROW(decode_snapshot(std::span(bytes).first(3)), FormatError);
}

TEST(SnapshotFormat, Crc32KnownValue) {
  const std::string s = "123456789";
  EXPECT_EQ(crc32(std::span(reinterpret_cast<const unsigned char*>(s.data()), s.size())), 0xCBF43926u);
}

TEST(Dataset, SyntheticBalancedAndDeterministic) {
  const Dataset a = small_data(100, 10, 5);
  const Dataset b = small_data(100, 10, 5);
  EXPECT_EQ(a.images, b.images);
  EXPECT_EQ(a.labels, b.labels);
  std::vector<int> counts(10, 0);
  for (int y : a.labels) ++counts[static_cast<std::size_t>(y)];
  for (int c : counts) EXPECT_EQ(c, 10);
  EXPECT_EQ(a.images.shape(), (Shape{100, 3, 8, 8}));
  EXPECT_TRUE(a.images.all_finite());
}

TEST(Dataset, RawFileRoundTrip) {
  const Dataset a = small_data(12, 3, 2);
  const auto path = std::filesystem::temp_directory_path() / "rlnas_raw_test.bin";
  save_raw_dataset(path, a);
  const Dataset b = load_raw_dataset(path);
  EXPECT_EQ(a.images, b.images);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.num_classes, b.num_classes);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace rlnas

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


#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include <fmt/format.h>

#include "rlnas/angle.hpp"
#include "rlnas/bench.hpp"
#include "rlnas/dataset.hpp"
#include "rlnas/nn.hpp"
#include "rlnas/supernet.hpp"

namespace {

using namespace rlnas;

void BM_ComputeAngle(benchmark::State& state) {
  const auto space = SearchSpace::nas_bench_201(2, static_cast<int>(state.range(0)));
  const auto w0 = init_supernet(space, 1);
  const auto wt = init_supernet(space, 2);
  const ArchEncoding enc({3, 2, 3, 4, 3, 3});
  for (auto _ : state) benchmark::DoNotOptimize(compute_angle(space, enc, w0, wt, SkipMode::kEmpty));
}
BENCHMARK(BM_ComputeAngle)->Arg(8)->Arg(16);

void BM_KendallTau(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  RankList a, b;
  for (std::size_t i = 0; i < n; ++i) a.push_back(fmt::format("x{}", i));
  b = a;
  Rng rng(3);
  rng.shuffle(std::span(b));
  for (auto _ : state) benchmark::DoNotOptimize(kendall_tau(a, b));
}
BENCHMARK(BM_KendallTau)->Arg(1000)->Arg(15625);

void BM_Conv3x3(benchmark::State& state) {
  const int ch = static_cast<int>(state.range(0));
  Tensor x({16, ch, 8, 8}, 0.5f);
  Tensor w({ch, ch, 3, 3}, 0.1f);
  for (auto _ : state) benchmark::DoNotOptimize(nn::conv2d(x, w));
}
BENCHMARK(BM_Conv3x3)->Arg(8)->Arg(16);

void BM_TrainStep(benchmark::State& state) {
  const auto space = SearchSpace::nas_bench_201(2, 8);
  auto w = init_supernet(space, 1);
  SyntheticSpec spec;
  const Dataset data = make_synthetic(spec, 64, 0);
  std::vector<std::size_t> idx(64);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  const Tensor images = data.batch(idx);
  const auto labels = data.batch_labels(idx);
  TensorStore velocity;
  const ArchEncoding enc({3, 3, 3, 3, 3, 3});
  for (auto _ : state)
    benchmark::DoNotOptimize(train_step(space, w, velocity, enc, images, labels, 0.01, nn::TrainHyper{}));
}
BENCHMARK(BM_TrainStep);

}  // namespace

BENCHMARK_MAIN();

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

#ifndef RLNAS_EVOLUTION_HPP
#define RLNAS_EVOLUTION_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "rlnas/rng.hpp"
#include "rlnas/search_space.hpp"

namespace rlnas {

enum class FitnessKind { kAngle, kValAcc, kTabular, kCustom };

std::string_view to_string(FitnessKind k);
FitnessKind parse_fitness_kind(std::string_view s);  // throws ConfigError

// Deterministic score, higher is better.
struct FitnessFn {
  FitnessKind kind = FitnessKind::kCustom;
  std::function<double(const ArchEncoding&)> score;
};

using Constraint = std::function<bool(const ArchEncoding&)>;

struct EvolutionConfig {
  int population = 100;
  int max_iterations = 20;
  int top_k = 30;
  double mutation_prob = 0.1;
  // Offspring per generation. -1 splits population - top_k evenly, with the
  // odd one going to mutation.
  int crossover_count = -1;
  int mutation_count = -1;
  Constraint constraint;  // empty = unconstrained
  std::uint64_t seed = 0;
  // Draw attempts allowed per requested individual before giving up.
  int retries_per_slot = 100;
  // Threads for fitness evaluation; results do not depend on it.
  int threads = 1;

  void validate() const;  // throws ContractViolation
  int resolved_crossover() const;
  int resolved_mutation() const;
};

struct Scored {
  ArchEncoding encoding;
  std::string arch;  // encode_str form, also the tie-break key
  double fitness = 0.0;
};

struct EvolutionResult {
  std::vector<Scored> ranked;         // every evaluated encoding, best first
  std::vector<double> generation_best;  // best elite fitness after each generation
  std::size_t evaluations = 0;
};

// Each edge is resampled uniformly with probability `prob` (possibly to the
// same op).
ArchEncoding mutate(const ArchEncoding& encoding, const SearchSpace& space, double prob, Rng& rng);

// Each edge copied from a or b with probability 1/2.
ArchEncoding crossover(const ArchEncoding& a, const ArchEncoding& b, Rng& rng);

// Population-based search with top-k elites, crossover among elites and
// mutation of elites. Fitness is memoized per architecture string. Throws
// ConstraintInfeasible when no constraint-satisfying encoding is found for
// the initial population within the retry budget.
EvolutionResult evolve(const SearchSpace& space, const FitnessFn& fitness,
                       const EvolutionConfig& config);

struct InputShape {
  int channels = 3;
  int height = 8;
  int width = 8;
};

// Multiply-accumulates of the searchable cells plus the classifier:
// conv KxK costs K*K*Cin*Cout*H*W; pool, skip and none cost 0. The fixed stem
// and stage projections are identical for every encoding and are not counted.
std::uint64_t flops_estimate(const SearchSpace& space, const ArchEncoding& encoding,
                             const InputShape& input, int num_classes);

}  // namespace rlnas

#endif  // RLNAS_EVOLUTION_HPP

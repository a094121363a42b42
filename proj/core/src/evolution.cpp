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

#include "rlnas/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "rlnas/errors.hpp"
#include "rlnas/parallel.hpp"

namespace rlnas {

namespace {

bool better(const Scored& a, const Scored& b) {
  if (a.fitness != b.fitness) return a.fitness > b.fitness;
  return a.arch < b.arch;
}

class Search {
 public:
  Search(const SearchSpace& space, const FitnessFn& fitness, const EvolutionConfig& cfg)
      : space_(space), fitness_(fitness), cfg_(cfg), rng_(cfg.seed) {}

  EvolutionResult run() {
    std::vector<Scored> elites = select(evaluate(initial_population()));
    result_.generation_best.push_back(elites.front().fitness);
    for (int gen = 1; gen < cfg_.max_iterations; ++gen) {
      std::vector<ArchEncoding> children;
      std::set<std::string> batch;
      breed(elites, cfg_.resolved_crossover(), children, batch, [&](const auto& el) {
        const auto& a = el[rng_.uniform_index(el.size())].encoding;
        const auto& b = el[rng_.uniform_index(el.size())].encoding;
        return crossover(a, b, rng_);
      });
      breed(elites, cfg_.resolved_mutation(), children, batch, [&](const auto& el) {
        return mutate(el[rng_.uniform_index(el.size())].encoding, space_, cfg_.mutation_prob, rng_);
      });
      auto scored = evaluate(children);
      scored.insert(scored.end(), elites.begin(), elites.end());
      elites = select(std::move(scored));
      result_.generation_best.push_back(elites.front().fitness);
    }
    result_.ranked.reserve(memo_.size());
    for (const auto& [arch, s] : memo_) result_.ranked.push_back(s);
    std::sort(result_.ranked.begin(), result_.ranked.end(), better);
    result_.evaluations = memo_.size();
    return std::move(result_);
  }

 private:
  bool feasible(const ArchEncoding& a) const { return !cfg_.constraint || cfg_.constraint(a); }

  std::vector<ArchEncoding> initial_population() {
    std::vector<ArchEncoding> out;
    std::set<std::string> seen;
    const long budget = static_cast<long>(cfg_.population) * cfg_.retries_per_slot;
    for (long attempt = 0; attempt < budget && out.size() < static_cast<std::size_t>(cfg_.population);
         ++attempt) {
      ArchEncoding a = random_arch(space_, rng_);
      if (!feasible(a)) continue;
      if (seen.insert(encode_str(space_, a)).second) out.push_back(std::move(a));
    }
    if (out.empty())
      throw ConstraintInfeasible(fmt::format(
          "no architecture satisfied the constraint within {} draws", budget));
    return out;
  }

  template <typename Make>
  void breed(const std::vector<Scored>& elites, int count, std::vector<ArchEncoding>& out,
             std::set<std::string>& batch, Make make) {
    const long budget = static_cast<long>(count) * cfg_.retries_per_slot;
    int made = 0;
    for (long attempt = 0; attempt < budget && made < count; ++attempt) {
      ArchEncoding child = make(elites);
      if (!feasible(child)) continue;
      std::string key = encode_str(space_, child);
      if (memo_.contains(key) || !batch.insert(std::move(key)).second) continue;
      out.push_back(std::move(child));
      ++made;
    }
  }

  // `fresh` holds distinct, not yet evaluated encodings.
  std::vector<Scored> evaluate(const std::vector<ArchEncoding>& fresh) {
    std::vector<Scored> out(fresh.size());
    parallel_for(fresh.size(), cfg_.threads, [&](std::size_t i) {
      out[i].encoding = fresh[i];
      out[i].arch = encode_str(space_, fresh[i]);
      out[i].fitness = fitness_.score(fresh[i]);
    });
    for (const auto& s : out) {
      if (std::isnan(s.fitness))
        throw ContractViolation(fmt::format("fitness returned NaN for {}", s.arch));
      memo_.emplace(s.arch, s);
    }
    return out;
  }

  std::vector<Scored> select(std::vector<Scored> pool) const {
    std::sort(pool.begin(), pool.end(), better);
    if (pool.size() > static_cast<std::size_t>(cfg_.top_k))
      pool.resize(static_cast<std::size_t>(cfg_.top_k));
    return pool;
  }

  const SearchSpace& space_;
  const FitnessFn& fitness_;
  const EvolutionConfig& cfg_;
  Rng rng_;
  std::map<std::string, Scored> memo_;
  EvolutionResult result_;
};

}  // namespace

std::string_view to_string(FitnessKind k) {
  switch (k) {
    case FitnessKind::kAngle:
      return "angle";
    case FitnessKind::kValAcc:
      return "val_acc";
    case FitnessKind::kTabular:
      return "tabular";
    case FitnessKind::kCustom:
      return "custom";
  }
  return "?";
}

FitnessKind parse_fitness_kind(std::string_view s) {
  for (auto k : {FitnessKind::kAngle, FitnessKind::kValAcc, FitnessKind::kTabular, FitnessKind::kCustom})
    if (to_string(k) == s) return k;
  throw ConfigError(fmt::format("unknown fitness kind '{}'", s));
}

void EvolutionConfig::validate() const {
  if (population < 1) throw ContractViolation("population must be >= 1");
  if (max_iterations < 1) throw ContractViolation("max_iterations must be >= 1");
  if (top_k < 1 || top_k > population) throw ContractViolation("top_k must be in [1, population]");
  if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0))
    throw ContractViolation("mutation_prob must be in [0, 1]");
  if (retries_per_slot < 1) throw ContractViolation("retries_per_slot must be >= 1");
  const int x = resolved_crossover();
  const int m = resolved_mutation();
  if (x < 0 || m < 0) throw ContractViolation("offspring counts must be >= 0");
  if (top_k + x + m != population)
    throw ContractViolation(fmt::format(
        "top_k ({}) + crossover ({}) + mutation ({}) must equal population ({})", top_k, x, m,
        population));
}

int EvolutionConfig::resolved_crossover() const {
  if (crossover_count >= 0) return crossover_count;
  if (mutation_count >= 0) return population - top_k - mutation_count;
  return (population - top_k) / 2;
}

int EvolutionConfig::resolved_mutation() const {
  if (mutation_count >= 0) return mutation_count;
  return population - top_k - resolved_crossover();
}

ArchEncoding mutate(const ArchEncoding& encoding, const SearchSpace& space, double prob, Rng& rng) {
  space.check(encoding);
  ArchEncoding out = encoding;
  for (std::size_t e = 0; e < out.size(); ++e)
    if (rng.bernoulli(prob))
      out.choices[e] = static_cast<int>(rng.uniform_index(space.alternatives[e].size()));
  return out;
}

ArchEncoding crossover(const ArchEncoding& a, const ArchEncoding& b, Rng& rng) {
  if (a.size() != b.size()) throw ContractViolation("crossover parents differ in length");
  ArchEncoding out = a;
  for (std::size_t e = 0; e < out.size(); ++e)
    if (rng.bernoulli(0.5)) out.choices[e] = b[e];
  return out;
}

EvolutionResult evolve(const SearchSpace& space, const FitnessFn& fitness,
                       const EvolutionConfig& config) {
  config.validate();
  space.validate();
  if (!fitness.score) throw ContractViolation("fitness function is empty");
  return Search(space, fitness, config).run();
}

std::uint64_t flops_estimate(const SearchSpace& space, const ArchEncoding& encoding,
                             const InputShape& input, int num_classes) {
  space.check(encoding);
  std::uint64_t h = static_cast<std::uint64_t>(input.height);
  std::uint64_t w = static_cast<std::uint64_t>(input.width);
  std::uint64_t total = 0;
  for (int c = 0; c < space.stack_depth; ++c) {
    const auto ch = static_cast<std::uint64_t>(space.channels[static_cast<std::size_t>(c)]);
    if (c > 0 && space.channels[static_cast<std::size_t>(c)] != space.channels[static_cast<std::size_t>(c - 1)]) {
      h /= 2;
      w /= 2;
    }
    for (std::size_t e = 0; e < space.num_edges(); ++e) {
      const OpKind& op = space.op(encoding, e);
      if (!op.has_weights()) continue;
      const auto k = static_cast<std::uint64_t>(op.kernel);
      total += k * k * ch * ch * h * w;
    }
  }
  total += static_cast<std::uint64_t>(space.channels.back()) * static_cast<std::uint64_t>(num_classes);
  return total;
}

}  // namespace rlnas

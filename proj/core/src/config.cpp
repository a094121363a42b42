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

#include "rlnas/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <type_traits>

#include <fmt/format.h>

#include "rlnas/byte_io.hpp"
#include "rlnas/errors.hpp"
#include "rlnas/rng.hpp"

namespace rlnas {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Reads typed values out of a KeyValueConfig and records the resolved
// setting for the canonical listing.
class Resolver {
 public:
  explicit Resolver(const KeyValueConfig& kv) : kv_(kv) {}

  std::string str(const std::string& key, const std::string& def, bool hashed = true) {
    const auto v = kv_.get(key).value_or(def);
    if (hashed) canonical_[key] = v;
    return v;
  }

  template <typename T>
  T num(const std::string& key, T def) {
    const auto raw = kv_.get(key);
    T value = def;
    if (raw) {
      const std::string_view s = *raw;
      auto r = std::from_chars(s.data(), s.data() + s.size(), value);
      if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
        throw ConfigError(fmt::format("{}: '{}' is not a valid number", key, s));
      if constexpr (std::is_floating_point_v<T>)
        if (!std::isfinite(value)) throw ConfigError(fmt::format("{}: must be finite", key));
    }
    canonical_[key] = fmt::format("{}", value);
    return value;
  }

  bool has(const std::string& key) const { return kv_.has(key); }

  std::string canonical() const {
    std::string out;
    for (const auto& [k, v] : canonical_) out += k + "=" + v + "\n";
    return out;
  }

 private:
  const KeyValueConfig& kv_;
  std::map<std::string, std::string> canonical_;
};

std::string fnv_hex(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

void require(bool ok, std::string_view key, std::string_view what) {
  if (!ok) throw ConfigError(fmt::format("{}: {}", key, what));
}

// Prefixes a parser's ConfigError with the key it came from.
template <typename F>
auto keyed(std::string_view key, F&& parse) {
  try {
    return parse();
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", key, e.what()));
  }
}

}  // namespace

const std::vector<std::string>& KeyValueConfig::known_keys() {
  static const std::vector<std::string> keys = {
      "run.seed",          "run.out",           "run.threads",        "space.preset",
      "space.stack_depth", "space.channels",    "data.source",        "data.train_path",
      "data.val_path",     "data.train_size",   "data.val_size",      "data.height",
      "data.width",        "data.classes",      "data.noise",         "data.seed",
      "label.method",      "label.categories",  "label.seed",         "label.iterations",
      "train.lr_max",      "train.lr_min",      "train.momentum",     "train.weight_decay",
      "train.epochs",      "train.batch_size",  "train.seed",         "train.init_seed",
      "search.fitness",    "evo.population",    "evo.iterations",     "evo.top_k",
      "evo.mutation_prob", "evo.crossover_count", "evo.mutation_count", "evo.flops_budget",
      "evo.seed",          "angle.mode",        "angle.comparison",   "angle.init_seed",
      "snapshot.path",     "bench.path",        "bench.dataset_tag",  "bench.rank_by",
      "rank.methods",      "baseline.kind",     "baseline.samples",   "baseline.seed",
      "sweep.categories",  "fixture.kind",      "fixture.max_archs",
  };
  return keys;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end())
    throw ConfigError(fmt::format("unknown configuration key '{}'", key));
  values_[key] = value;
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
  KeyValueConfig cfg;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3)
        throw ConfigError(fmt::format("config line {}: malformed section header", line_no));
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(fmt::format("config line {}: expected key = value", line_no));
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(fmt::format("config line {}: empty key", line_no));
    if (!section.empty() && key.find('.') == std::string::npos) key = section + "." + key;
    try {
      cfg.set(key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("config line {}: {}", line_no, e.what()));
    }
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::vector<unsigned char> bytes;
  try {
    bytes = io::read_file(path);
  } catch (const FormatError&) {
    throw ConfigError(fmt::format("cannot read config file {}", path.string()));
  }
  return parse(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::vector<int> parse_int_list(std::string_view key, std::string_view text) {
  auto to_int = [&](std::string_view s) {
    s = trim(s);
    int v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc{} || r.ptr != s.data() + s.size())
      throw ConfigError(fmt::format("{}: '{}' is not an integer", key, s));
    return v;
  };
  std::vector<int> out;
  if (text.find(':') != std::string_view::npos) {
    const auto a = text.find(':');
    const auto b = text.find(':', a + 1);
    require(b != std::string_view::npos, key, "range must be start:stop:step");
    const int start = to_int(text.substr(0, a));
    const int stop = to_int(text.substr(a + 1, b - a - 1));
    const int step = to_int(text.substr(b + 1));
    require(step > 0 && stop >= start, key, "range needs step > 0 and stop >= start");
    for (int v = start; v <= stop; v += step) out.push_back(v);
    return out;
  }
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    out.push_back(to_int(text.substr(pos, end - pos)));
    pos = end + 1;
  }
  return out;
}

SearchSpace ExperimentConfig::space() const {
  SearchSpace s;
  if (space_preset == "nas_bench_201")
    s = SearchSpace::nas_bench_201(1, 1);
  else if (space_preset == "darts_like")
    s = SearchSpace::darts_like(1, 1);
  else
    s = SearchSpace::toy3(1, 1);
  s.stack_depth = stack_depth;
  s.channels = channels.size() == 1 ? std::vector<int>(static_cast<std::size_t>(stack_depth), channels[0])
                                    : channels;
  s.validate();
  return s;
}

SkipMode ExperimentConfig::skip_mode(const SearchSpace& s) const {
  switch (angle_mode) {
    case SkipModeChoice::kEmpty:
      return SkipMode::kEmpty;
    case SkipModeChoice::kIdentity:
      return SkipMode::kIdentity;
    case SkipModeChoice::kAuto:
      break;
  }
  return default_skip_mode(s);
}

std::filesystem::path ExperimentConfig::resolved_snapshot_path() const {
  return snapshot_path.empty() ? out_dir / "snapshot.rlns" : snapshot_path;
}

int ExperimentConfig::classifier_width() const {
  return std::max(synthetic.num_classes, label_categories);
}

ExperimentConfig resolve_config(const KeyValueConfig& kv) {
  Resolver r(kv);
  ExperimentConfig c;
  c.seed = r.num<std::uint64_t>("run.seed", 0);
  c.out_dir = r.str("run.out", "rlnas_out", false);
  c.evo.threads = std::stoi(r.str("run.threads", "1", false));
  require(c.evo.threads >= 1, "run.threads", "must be >= 1");

  c.space_preset = r.str("space.preset", "nas_bench_201");
  require(c.space_preset == "nas_bench_201" || c.space_preset == "darts_like" ||
              c.space_preset == "toy3",
          "space.preset", "must be nas_bench_201, darts_like or toy3");
  c.stack_depth = r.num("space.stack_depth", 2);
  require(c.stack_depth >= 1, "space.stack_depth", "must be >= 1");
  c.channels = parse_int_list("space.channels", r.str("space.channels", "8"));
  require(c.channels.size() == 1 || c.channels.size() == static_cast<std::size_t>(c.stack_depth),
          "space.channels", "give one value or one per stacked cell");
  for (int ch : c.channels) require(ch >= 1, "space.channels", "must be positive");

  c.data_source = r.str("data.source", "synthetic");
  require(c.data_source == "synthetic" || c.data_source == "file", "data.source",
          "must be synthetic or file");
  c.train_path = r.str("data.train_path", "");
  c.val_path = r.str("data.val_path", "");
  if (c.data_source == "file") {
    require(!c.train_path.empty(), "data.train_path", "required when data.source = file");
  }
  c.train_size = r.num<std::size_t>("data.train_size", 1024);
  c.val_size = r.num<std::size_t>("data.val_size", 256);
  require(c.train_size >= 1, "data.train_size", "must be >= 1");
  c.synthetic.height = r.num("data.height", 8);
  c.synthetic.width = r.num("data.width", 8);
  c.synthetic.num_classes = r.num("data.classes", 10);
  c.synthetic.noise = r.num("data.noise", 0.3);
  require(c.synthetic.height >= 1 && c.synthetic.width >= 1, "data.height", "must be >= 1");
  require(c.synthetic.num_classes >= 2, "data.classes", "must be >= 2");
  require(c.synthetic.noise >= 0.0, "data.noise", "must be >= 0");

  c.label_method = keyed("label.method", [&] { return parse_label_method(r.str("label.method", "uniform_once")); });
  c.label_categories = r.num("label.categories", 0);
  require(c.label_categories == 0 || c.label_categories >= 2, "label.categories",
          "must be >= 2 (or 0 for the dataset's class count)");
  c.label_audit_iterations = r.num("label.iterations", 1);
  require(c.label_audit_iterations >= 1, "label.iterations", "must be >= 1");

  c.hyper.lr_max = r.num("train.lr_max", 0.025);
  c.hyper.lr_min = r.num("train.lr_min", 0.001);
  c.hyper.momentum = r.num("train.momentum", 0.9);
  c.hyper.weight_decay = r.num("train.weight_decay", 5e-4);
  c.hyper.epochs = r.num("train.epochs", 2);
  c.hyper.batch_size = r.num("train.batch_size", 64);
  require(c.hyper.lr_min > 0.0, "train.lr_min", "must be > 0");
  require(c.hyper.lr_max >= c.hyper.lr_min, "train.lr_max", "must be >= train.lr_min");
  require(c.hyper.momentum >= 0.0 && c.hyper.momentum < 1.0, "train.momentum", "must be in [0, 1)");
  require(c.hyper.weight_decay >= 0.0, "train.weight_decay", "must be >= 0");
  require(c.hyper.epochs >= 0, "train.epochs", "must be >= 0");
  require(c.hyper.batch_size >= 1, "train.batch_size", "must be >= 1");

  c.fitness = keyed("search.fitness", [&] { return parse_fitness_kind(r.str("search.fitness", "angle")); });
  require(c.fitness != FitnessKind::kCustom, "search.fitness", "must be angle, val_acc or tabular");
  c.evo.population = r.num("evo.population", 100);
  c.evo.max_iterations = r.num("evo.iterations", 20);
  c.evo.top_k = r.num("evo.top_k", 30);
  c.evo.mutation_prob = r.num("evo.mutation_prob", 0.1);
  c.evo.crossover_count = r.num("evo.crossover_count", -1);
  c.evo.mutation_count = r.num("evo.mutation_count", -1);
  c.flops_budget = r.num<std::uint64_t>("evo.flops_budget", 0);
  try {
    c.evo.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(fmt::format("evo: {}", e.what()));
  }

  const auto mode = r.str("angle.mode", "auto");
  if (mode == "auto")
    c.angle_mode = SkipModeChoice::kAuto;
  else if (mode == "empty_skip")
    c.angle_mode = SkipModeChoice::kEmpty;
  else if (mode == "identity_skip")
    c.angle_mode = SkipModeChoice::kIdentity;
  else
    throw ConfigError("angle.mode: must be auto, empty_skip or identity_skip");
  const auto cmp = r.str("angle.comparison", "init_vs_trained");
  require(cmp == "init_vs_trained" || cmp == "init_vs_init", "angle.comparison",
          "must be init_vs_trained or init_vs_init");
  c.angle_comparison = cmp == "init_vs_init" ? Comparison::kInitVsInit : Comparison::kInitVsTrained;
  c.snapshot_path = r.str("snapshot.path", "", false);

  c.bench_path = r.str("bench.path", "");
  c.bench_tag = r.str("bench.dataset_tag", "synthetic");
  const auto rank_by = r.str("bench.rank_by", "test");
  require(rank_by == "test" || rank_by == "val", "bench.rank_by", "must be test or val");
  c.rank_by = rank_by == "val" ? AccField::kVal : AccField::kTest;

  c.methods.clear();
  for (char ch : r.str("rank.methods", "D")) {
    if (ch == ',' || ch == ' ') continue;
    require(ch >= 'A' && ch <= 'D', "rank.methods", "letters must be among A, B, C, D");
    if (std::find(c.methods.begin(), c.methods.end(), ch) == c.methods.end()) c.methods.push_back(ch);
  }
  require(!c.methods.empty(), "rank.methods", "list at least one method");

  c.baseline_kind = r.str("baseline.kind", "random_search");
  require(c.baseline_kind == "random_search" || c.baseline_kind == "training_free",
          "baseline.kind", "must be random_search or training_free");
  c.baseline_samples = r.num("baseline.samples", 100);
  require(c.baseline_samples >= 1, "baseline.samples", "must be >= 1");
  c.sweep_categories = parse_int_list("sweep.categories", r.str("sweep.categories", "10:200:10"));
  for (int k : c.sweep_categories) require(k >= 2, "sweep.categories", "every entry must be >= 2");
  c.fixture_kind = r.str("fixture.kind", "synthetic");
  require(c.fixture_kind == "synthetic" || c.fixture_kind == "standalone", "fixture.kind",
          "must be synthetic or standalone");
  c.fixture_max_archs = r.num<std::uint64_t>("fixture.max_archs", 512);

  // Derived seeds; explicit keys win unless --seed cleared them.
  auto seed_of = [&](const std::string& key, std::uint64_t tag) {
    return r.num<std::uint64_t>(key, derive_seed(c.seed, tag));
  };
  c.data_seed = seed_of("data.seed", 1);
  c.synthetic.seed = c.data_seed;
  c.init_seed = seed_of("train.init_seed", 2);
  c.train_seed = seed_of("train.seed", 3);
  c.label_seed = seed_of("label.seed", 4);
  c.evo.seed = seed_of("evo.seed", 5);
  c.second_init_seed = seed_of("angle.init_seed", 6);
  c.baseline_seed = seed_of("baseline.seed", 7);
  require(c.second_init_seed != c.init_seed, "angle.init_seed", "must differ from train.init_seed");

  c.canonical = r.canonical();
  c.config_hash = fnv_hex(c.canonical);
  return c;
}

}  // namespace rlnas

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

#include "rlnas/supernet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "rlnas/errors.hpp"

namespace rlnas {

namespace {

std::uint64_t name_tag(const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Tensor he_uniform(const Shape& shape, int fan_in, std::uint64_t seed) {
  Tensor t(shape);
  Rng rng(seed);
  const double bound = std::sqrt(6.0 / fan_in);
  for (auto& v : t.data()) v = static_cast<float>(rng.uniform(-bound, bound));
  return t;
}

void add_inplace(Tensor& acc, const Tensor& x) {
  if (acc.empty()) {
    acc = x;
    return;
  }
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += x[i];
}

Tensor& grad_slot(TensorStore& grads, const std::string& name, const Shape& shape) {
  auto it = grads.find(name);
  if (it == grads.end()) it = grads.emplace(name, Tensor(shape)).first;
  return it->second;
}

std::string reduce_name(int cell) { return fmt::format("reduce{}.weight", cell); }

bool needs_reduce(const SearchSpace& space, int cell) {
  return cell > 0 && space.channels[static_cast<std::size_t>(cell)] !=
                         space.channels[static_cast<std::size_t>(cell - 1)];
}

struct CellRecord {
  bool reduced = false;
  Tensor down;
  Tensor reduce_out;
  std::vector<Tensor> nodes;
  std::vector<Tensor> edge_out;
  Tensor out;
};

struct Tape {
  Tensor stem_out;
  std::vector<CellRecord> cells;
  Tensor last;  // output of the last cell
  Tensor pooled;
  Tensor logits;
};

Tape run_forward(const SearchSpace& space, const SuperNetWeights& w, const ArchEncoding& enc,
                 const Tensor& images) {
  space.check(enc);
  Tape tape;
  tape.stem_out = nn::relu(nn::conv2d(images, w.at("stem.weight")));
  const Tensor* cur = &tape.stem_out;
  const auto& cell = space.cell;
  tape.cells.resize(static_cast<std::size_t>(space.stack_depth));
  for (int c = 0; c < space.stack_depth; ++c) {
    CellRecord& rec = tape.cells[static_cast<std::size_t>(c)];
    if (needs_reduce(space, c)) {
      rec.reduced = true;
      rec.down = nn::downsample2x2(*cur);
      rec.reduce_out = nn::relu(nn::conv2d(rec.down, w.at(reduce_name(c))));
      cur = &rec.reduce_out;
    }
    rec.nodes.assign(static_cast<std::size_t>(cell.num_nodes), Tensor());
    rec.edge_out.assign(cell.edges.size(), Tensor());
    for (int in : cell.input_nodes) rec.nodes[static_cast<std::size_t>(in)] = *cur;
    for (int j = 0; j < cell.num_nodes; ++j) {
      auto& node = rec.nodes[static_cast<std::size_t>(j)];
      for (std::size_t e = 0; e < cell.edges.size(); ++e) {
        if (cell.edges[e].to != j) continue;
        const OpKind& op = space.op(enc, e);
        if (op.type == OpType::kNone) continue;
        const Tensor* kernel =
            op.has_weights() ? &w.at(kernel_name(c, static_cast<int>(e), enc[e])) : nullptr;
        rec.edge_out[e] = nn::forward(op, kernel, rec.nodes[static_cast<std::size_t>(cell.edges[e].from)]);
        add_inplace(node, rec.edge_out[e]);
      }
      if (node.empty()) node = Tensor(cur->shape());
    }
    for (int o : cell.output_nodes) add_inplace(rec.out, rec.nodes[static_cast<std::size_t>(o)]);
    cur = &rec.out;
  }
  tape.last = *cur;
  tape.pooled = nn::global_avg_pool(tape.last);
  tape.logits = nn::linear(tape.pooled, w.at("classifier.weight"), w.at("classifier.bias"));
  return tape;
}

void run_backward(const SearchSpace& space, const SuperNetWeights& w, const ArchEncoding& enc,
                  const Tensor& images, const Tape& tape, const Tensor& dlogits,
                  TensorStore& grads) {
  const auto& cw = w.at("classifier.weight");
  const auto& cb = w.at("classifier.bias");
  Tensor dpooled = nn::linear_backward(tape.pooled, cw, dlogits,
                                       grad_slot(grads, "classifier.weight", cw.shape()),
                                       grad_slot(grads, "classifier.bias", cb.shape()));
  Tensor dcur = nn::global_avg_pool_backward(dpooled, tape.last.dim(2), tape.last.dim(3));
  const auto& cell = space.cell;
  for (int c = space.stack_depth; c-- > 0;) {
    const CellRecord& rec = tape.cells[static_cast<std::size_t>(c)];
    std::vector<Tensor> dnodes(static_cast<std::size_t>(cell.num_nodes));
    for (int o : cell.output_nodes) add_inplace(dnodes[static_cast<std::size_t>(o)], dcur);
    for (int j = cell.num_nodes; j-- > 0;) {
      const Tensor& dy = dnodes[static_cast<std::size_t>(j)];
      if (dy.empty()) continue;
      for (std::size_t e = 0; e < cell.edges.size(); ++e) {
        if (cell.edges[e].to != j) continue;
        const OpKind& op = space.op(enc, e);
        const auto from = static_cast<std::size_t>(cell.edges[e].from);
        const Tensor& x = rec.nodes[from];
        switch (op.type) {
          case OpType::kNone:
            break;
          case OpType::kSkip:
            add_inplace(dnodes[from], dy);
            break;
          case OpType::kAvgPool:
            add_inplace(dnodes[from], nn::avg_pool_backward(x, op.kernel, dy));
            break;
          case OpType::kMaxPool:
            add_inplace(dnodes[from], nn::max_pool_backward(x, op.kernel, dy));
            break;
          case OpType::kConv: {
            const auto name = kernel_name(c, static_cast<int>(e), enc[e]);
            const Tensor& k = w.at(name);
            Tensor dpre = nn::relu_backward(rec.edge_out[e], dy);
            add_inplace(dnodes[from], nn::conv2d_backward(x, k, dpre, grad_slot(grads, name, k.shape())));
            break;
          }
        }
      }
    }
    Tensor din;
    for (int in : cell.input_nodes) {
      const Tensor& d = dnodes[static_cast<std::size_t>(in)];
      if (!d.empty()) add_inplace(din, d);
    }
    if (din.empty()) din = Tensor(rec.nodes[static_cast<std::size_t>(cell.input_nodes.front())].shape());
    if (rec.reduced) {
      const auto name = reduce_name(c);
      const Tensor& k = w.at(name);
      Tensor dpre = nn::relu_backward(rec.reduce_out, din);
      Tensor ddown = nn::conv2d_backward(rec.down, k, dpre, grad_slot(grads, name, k.shape()));
      dcur = nn::downsample2x2_backward(ddown);
    } else {
      dcur = std::move(din);
    }
  }
  const auto& sw = w.at("stem.weight");
  Tensor dpre = nn::relu_backward(tape.stem_out, dcur);
  nn::conv2d_backward(images, sw, dpre, grad_slot(grads, "stem.weight", sw.shape()));
}

}  // namespace

const Tensor& SuperNetWeights::at(const std::string& name) const {
  const auto it = store.find(name);
  if (it == store.end()) throw ContractViolation(fmt::format("no tensor named '{}'", name));
  return it->second;
}

bool SuperNetWeights::same_keys(const SuperNetWeights& other) const {
  return store.size() == other.store.size() &&
         std::equal(store.begin(), store.end(), other.store.begin(),
                    [](const auto& a, const auto& b) {
                      return a.first == b.first && a.second.shape() == b.second.shape();
                    });
}

std::string kernel_name(int cell, int edge, int op) {
  return fmt::format("cell{}.edge{}.op{}.weight", cell, edge, op);
}

SuperNetWeights init_supernet(const SearchSpace& space, std::uint64_t seed, const HeadConfig& head) {
  space.validate();
  if (head.input_channels < 1 || head.num_classes < 1)
    throw ContractViolation("head needs positive input channels and classes");
  SuperNetWeights w;
  w.meta = {space_hash(space), seed, kSchemaVersion};
  auto add = [&](const std::string& name, const Shape& shape, int fan_in) {
    w.store.emplace(name, he_uniform(shape, fan_in, derive_seed(seed, name_tag(name))));
  };
  const int c0 = space.channels.front();
  add("stem.weight", {c0, head.input_channels, 3, 3}, head.input_channels * 9);
  for (int c = 0; c < space.stack_depth; ++c) {
    const int ch = space.channels[static_cast<std::size_t>(c)];
    if (needs_reduce(space, c)) {
      const int prev = space.channels[static_cast<std::size_t>(c - 1)];
      add(reduce_name(c), {ch, prev, 1, 1}, prev);
    }
    for (std::size_t e = 0; e < space.num_edges(); ++e) {
      const auto& alts = space.alternatives[e];
      for (std::size_t o = 0; o < alts.size(); ++o) {
        if (!alts[o].has_weights()) continue;
        const int k = alts[o].kernel;
        add(kernel_name(c, static_cast<int>(e), static_cast<int>(o)), {ch, ch, k, k}, ch * k * k);
      }
    }
  }
  const int last = space.channels.back();
  add("classifier.weight", {head.num_classes, last}, last);
  w.store.emplace("classifier.bias", Tensor({head.num_classes}));
  return w;
}

Tensor forward_logits(const SearchSpace& space, const SuperNetWeights& weights,
                      const ArchEncoding& encoding, const Tensor& images) {
  return run_forward(space, weights, encoding, images).logits;
}

double batch_loss(const SearchSpace& space, const SuperNetWeights& weights,
                  const ArchEncoding& encoding, const Tensor& images, std::span<const int> labels) {
  return nn::cross_entropy(forward_logits(space, weights, encoding, images), labels);
}

namespace {

void append_active(std::vector<std::uint32_t>& out, const Tensor& relu_out) {
  for (float v : relu_out.data()) out.push_back(v > 0.0f);
}

// Flat index of the first maximum in every (clipped) window.
void append_argmax(std::vector<std::uint32_t>& out, const Tensor& x, int k) {
  const int B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3), p = k / 2;
  for (int b = 0; b < B; ++b)
    for (int c = 0; c < C; ++c)
      for (int h = 0; h < H; ++h)
        for (int w = 0; w < W; ++w) {
          int best_h = std::max(0, h - p), best_w = std::max(0, w - p);
          for (int ih = std::max(0, h - p); ih <= std::min(H - 1, h + p); ++ih)
            for (int iw = std::max(0, w - p); iw <= std::min(W - 1, w + p); ++iw)
              if (x.at(b, c, ih, iw) > x.at(b, c, best_h, best_w)) {
                best_h = ih;
                best_w = iw;
              }
          out.push_back(static_cast<std::uint32_t>(best_h * W + best_w));
        }
}

}  // namespace

std::vector<std::uint32_t> activation_pattern(const SearchSpace& space, const SuperNetWeights& weights,
                                              const ArchEncoding& encoding, const Tensor& images) {
  const Tape tape = run_forward(space, weights, encoding, images);
  std::vector<std::uint32_t> out;
  append_active(out, tape.stem_out);
  for (std::size_t c = 0; c < tape.cells.size(); ++c) {
    const CellRecord& rec = tape.cells[c];
    if (rec.reduced) append_active(out, rec.reduce_out);
    for (std::size_t e = 0; e < space.num_edges(); ++e) {
      const OpKind& op = space.op(encoding, e);
      if (op.has_weights()) append_active(out, rec.edge_out[e]);
      if (op.type == OpType::kMaxPool)
        append_argmax(out, rec.nodes[static_cast<std::size_t>(space.cell.edges[e].from)], op.kernel);
    }
  }
  return out;
}

double loss_and_grads(const SearchSpace& space, const SuperNetWeights& weights,
                      const ArchEncoding& encoding, const Tensor& images,
                      std::span<const int> labels, TensorStore& grads, double loss_scale) {
  const Tape tape = run_forward(space, weights, encoding, images);
  const double loss = nn::cross_entropy(tape.logits, labels);
  Tensor dlogits = nn::cross_entropy_backward(tape.logits, labels);
  if (loss_scale != 1.0)
    for (auto& v : dlogits.data()) v = static_cast<float>(v * loss_scale);
  run_backward(space, weights, encoding, images, tape, dlogits, grads);
  return loss;
}

double train_step(const SearchSpace& space, SuperNetWeights& weights, TensorStore& velocity,
                  const ArchEncoding& encoding, const Tensor& images,
                  std::span<const int> labels, double lr, const nn::TrainHyper& hyper) {
  TensorStore grads;
  const double loss = loss_and_grads(space, weights, encoding, images, labels, grads);
  if (!std::isfinite(loss)) return loss;
  for (const auto& [name, g] : grads) {
    Tensor& p = weights.store.at(name);
    auto vit = velocity.find(name);
    if (vit == velocity.end()) vit = velocity.emplace(name, Tensor(p.shape())).first;
    nn::sgd_step(p, g, vit->second, lr, hyper.momentum, hyper.weight_decay);
  }
  return loss;
}

Snapshot train_supernet(const SearchSpace& space, const SuperNetWeights& initial,
                        const Dataset& data, const LabelSource& labels,
                        const nn::TrainHyper& hyper, Rng& rng, const StepObserver& observer) {
  hyper.validate();
  if (data.size() == 0) throw ContractViolation("training set is empty");
  if (labels.dataset_size() != data.size())
    throw ContractViolation(fmt::format("label source covers {} samples, dataset has {}",
                                        labels.dataset_size(), data.size()));
  const int width = initial.at("classifier.bias").dim(0);
  if (labels.num_categories() > width)
    throw ContractViolation(fmt::format("{} label categories exceed classifier width {}",
                                        labels.num_categories(), width));

  Snapshot snap{initial, initial, {}};
  TensorStore velocity;
  const std::size_t n = data.size();
  const auto batch = static_cast<std::size_t>(hyper.batch_size);
  const std::size_t steps_per_epoch = (n + batch - 1) / batch;
  const long total = static_cast<long>(steps_per_epoch) * hyper.epochs;
  std::vector<std::size_t> order(n);
  long step = 0;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    double lr = hyper.lr_max;
    for (std::size_t s = 0; s < steps_per_epoch; ++s, ++step) {
      const std::span<const std::size_t> idx(order.data() + s * batch,
                                             std::min(batch, n - s * batch));
      const ArchEncoding enc = random_arch(space, rng);
      const Tensor images = data.batch(idx);
      const std::vector<int> y = labels.labels_for(idx, step);
      lr = nn::cosine_lr(step, total, hyper.lr_max, hyper.lr_min);
      const double loss = train_step(space, snap.current, velocity, enc, images, y, lr, hyper);
      if (!std::isfinite(loss))
        throw TrainingDiverged(fmt::format(
            "non-finite loss at epoch {} step {} (lr={}, arch={}); lower the learning rate or "
            "check the input data",
            epoch, step, lr, encode_str(space, enc)));
      loss_sum += loss * static_cast<double>(idx.size());
      if (observer) observer(step, enc, loss);
    }
    snap.log.push_back({loss_sum / static_cast<double>(n), lr});
  }
  return snap;
}

double eval_val_acc(const SearchSpace& space, const ArchEncoding& encoding,
                    const SuperNetWeights& weights, const Dataset& val, int batch_size) {
  if (val.size() == 0) throw ContractViolation("validation set is empty");
  if (batch_size < 1) throw ContractViolation("batch_size must be >= 1");
  std::size_t correct = 0;
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < val.size(); start += static_cast<std::size_t>(batch_size)) {
    idx.clear();
    for (std::size_t i = start; i < std::min(val.size(), start + batch_size); ++i) idx.push_back(i);
    const Tensor logits = forward_logits(space, weights, encoding, val.batch(idx));
    const int C = logits.dim(1);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const float* row = logits.ptr() + i * static_cast<std::size_t>(C);
      const auto pred = static_cast<int>(std::max_element(row, row + C) - row);
      if (pred == val.labels[idx[i]]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(val.size());
}

}  // namespace rlnas

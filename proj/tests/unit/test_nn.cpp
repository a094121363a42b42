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
#include <functional>
#include <numbers>

#include "rlnas/errors.hpp"
#include "rlnas/nn.hpp"
#include "rlnas/rng.hpp"

namespace rlnas::nn {
namespace {

Tensor random_tensor(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(shape);
  for (auto& v : t.data()) v = static_cast<float>(rng.uniform(lo, hi));
  return t;
}

double weighted_sum(const Tensor& y, const Tensor& r) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += static_cast<double>(y[i]) * r[i];
  return s;
}

// Central differences of `loss` w.r.t. every element of `x`, compared with
// `analytic`: |g - fd| <= 1e-4 + 1e-2 |fd|.
void expect_matches_fd(Tensor& x, const std::function<double()>& loss, const Tensor& analytic) {
  const float h = 1e-3f;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const float orig = x[i];
    x[i] = orig + h;
    const double up = loss();
    x[i] = orig - h;
    const double down = loss();
    x[i] = orig;
    const double fd = (up - down) / (2.0 * h);
    EXPECT_LE(std::abs(analytic[i] - fd), 1e-4 + 1e-2 * std::abs(fd)) << "element " << i;
  }
}

TEST(Forward, SkipIsIdentity) {
  Rng rng(1);
  const Tensor x = random_tensor({2, 3, 4, 4}, rng);
  EXPECT_EQ(forward(OpKind::skip(), nullptr, x), x);
}

TEST(Forward, NoneIsZeros) {
  Rng rng(2);
  const Tensor x = random_tensor({2, 3, 4, 4}, rng);
  const Tensor y = forward(OpKind::none(), nullptr, x);
  EXPECT_EQ(y.shape(), x.shape());
  for (float v : y.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Forward, AvgPoolKeepsConstantMap) {
  Tensor x({1, 2, 6, 6}, 2.5f);
  const Tensor y = forward(OpKind::avg_pool(3), nullptr, x);
  for (float v : y.data()) EXPECT_FLOAT_EQ(v, 2.5f);
}

TEST(Forward, AvgPoolHandValue) {
  Tensor x({1, 1, 3, 3});
  for (int i = 0; i < 9; ++i) x[static_cast<std::size_t>(i)] = static_cast<float>(i);
  const Tensor y = avg_pool(x, 3);
  EXPECT_FLOAT_EQ(y.at(0, 0, 1, 1), 4.0f);
  EXPECT_FLOAT_EQ(y.at(0, 0, 0, 0), (0 + 1 + 3 + 4) / 4.0f);
}

TEST(Forward, ConvIsFollowedByRelu) {
  Tensor x({1, 1, 3, 3}, 1.0f);
  Tensor w({1, 1, 1, 1}, -1.0f);
  const Tensor y = forward(OpKind::conv(1), &w, x);
  for (float v : y.data()) EXPECT_EQ(v, 0.0f);
  w.fill(2.0f);
  const Tensor z = forward(OpKind::conv(1), &w, x);
  for (float v : z.data()) EXPECT_EQ(v, 2.0f);
}

TEST(Forward, PreservesSpatialDims) {
  Rng rng(3);
  const Tensor x = random_tensor({2, 4, 5, 7}, rng);
  const Tensor w3 = random_tensor({4, 4, 3, 3}, rng);
  for (const auto& op : {OpKind::conv(3), OpKind::avg_pool(3), OpKind::max_pool(3), OpKind::skip(), OpKind::none()})
    EXPECT_EQ(forward(op, &w3, x).shape(), x.shape()) << op.name();
}

TEST(Forward, ShapeMismatchThrows) {
  Rng rng(4);
  const Tensor x = random_tensor({1, 3, 4, 4}, rng);
  const Tensor w = random_tensor({2, 5, 3, 3}, rng);
  EXPECT_THROW(forward(OpKind::conv(3), &w, x), ContractViolation);
  EXPECT_THROW(forward(OpKind::conv(3), nullptr, x), ContractViolation);
}

TEST(Forward, BitwiseDeterministic) {
  Rng rng(5);
  const Tensor x = random_tensor({2, 4, 6, 6}, rng);
  const Tensor w = random_tensor({4, 4, 3, 3}, rng);
  EXPECT_EQ(forward(OpKind::conv(3), &w, x), forward(OpKind::conv(3), &w, x));
}

TEST(Gradients, Conv2d) {
  Rng rng(10);
  Tensor x = random_tensor({2, 3, 5, 5}, rng);
  Tensor w = random_tensor({2, 3, 3, 3}, rng);
  const Tensor r = random_tensor({2, 2, 5, 5}, rng);
  Tensor dw(w.shape());
  const Tensor dx = conv2d_backward(x, w, r, dw);
  auto loss = [&] { return weighted_sum(conv2d(x, w), r); };
  expect_matches_fd(w, loss, dw);
  expect_matches_fd(x, loss, dx);
}

TEST(Gradients, ConvBackwardAccumulates) {
  Rng rng(11);
  const Tensor x = random_tensor({1, 2, 4, 4}, rng);
  const Tensor w = random_tensor({2, 2, 1, 1}, rng);
  const Tensor r = random_tensor({1, 2, 4, 4}, rng);
  Tensor once(w.shape()), twice(w.shape());
  conv2d_backward(x, w, r, once);
  conv2d_backward(x, w, r, twice);
  conv2d_backward(x, w, r, twice);
  for (std::size_t i = 0; i < once.size(); ++i) EXPECT_FLOAT_EQ(twice[i], 2.0f * once[i]);
}

TEST(Gradients, ZeroInputGivesZeroKernelGrad) {
  Rng rng(12);
  const Tensor x({2, 3, 4, 4});
  const Tensor w = random_tensor({3, 3, 3, 3}, rng);
  const Tensor r = random_tensor({2, 3, 4, 4}, rng);
  Tensor dw(w.shape());
  conv2d_backward(x, w, r, dw);
  for (float v : dw.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Gradients, Relu) {
  Rng rng(13);
  Tensor x = random_tensor({1, 2, 4, 4}, rng);
  const Tensor r = random_tensor({1, 2, 4, 4}, rng);
  const Tensor dx = relu_backward(relu(x), r);
  expect_matches_fd(x, [&] { return weighted_sum(relu(x), r); }, dx);
}

TEST(Gradients, AvgPool) {
  Rng rng(14);
  Tensor x = random_tensor({2, 2, 5, 4}, rng);
  const Tensor r = random_tensor({2, 2, 5, 4}, rng);
  const Tensor dx = avg_pool_backward(x, 3, r);
  expect_matches_fd(x, [&] { return weighted_sum(avg_pool(x, 3), r); }, dx);
}

TEST(Gradients, MaxPool) {
  Rng rng(15);
  Tensor x = random_tensor({2, 2, 5, 5}, rng);
  const Tensor r = random_tensor({2, 2, 5, 5}, rng);
  const Tensor dx = max_pool_backward(x, 3, r);
  expect_matches_fd(x, [&] { return weighted_sum(max_pool(x, 3), r); }, dx);
}

TEST(Gradients, Downsample) {
  Rng rng(16);
  Tensor x = random_tensor({2, 3, 4, 6}, rng);
  const Tensor r = random_tensor({2, 3, 2, 3}, rng);
  const Tensor dx = downsample2x2_backward(r);
  expect_matches_fd(x, [&] { return weighted_sum(downsample2x2(x), r); }, dx);
}

TEST(Gradients, GlobalAvgPoolAndLinear) {
  Rng rng(17);
  Tensor x = random_tensor({3, 4, 3, 3}, rng);
  Tensor w = random_tensor({5, 4}, rng);
  Tensor b = random_tensor({5}, rng);
  const std::vector<int> labels{0, 4, 2};
  auto loss = [&] { return cross_entropy(linear(global_avg_pool(x), w, b), labels); };
  const Tensor pooled = global_avg_pool(x);
  const Tensor g = cross_entropy_backward(linear(pooled, w, b), labels);
  Tensor dw(w.shape()), db(b.shape());
  const Tensor dpooled = linear_backward(pooled, w, g, dw, db);
  const Tensor dx = global_avg_pool_backward(dpooled, 3, 3);
  expect_matches_fd(w, loss, dw);
  expect_matches_fd(b, loss, db);
  expect_matches_fd(x, loss, dx);
}

TEST(CrossEntropy, UniformLogitsGiveLogC) {
  for (int c : {2, 3, 10, 200}) {
    Tensor logits({4, c}, 0.7f);
    EXPECT_NEAR(cross_entropy(logits, std::vector<int>{0, 1, c - 1, 0}), std::log(c), 1e-12);
  }
}

TEST(CrossEntropy, ClosedForm) {
  const Tensor logits({2, 3}, std::vector<float>{1, 0, 0, 0, 2, 0});
  const double e = std::numbers::e;
  const double expected = 0.5 * ((std::log(e + 2) - 1) + (std::log(e * e + 2) - 2));
  EXPECT_NEAR(cross_entropy(logits, std::vector<int>{0, 1}), expected, 1e-12);
}

TEST(CrossEntropy, DecreasesWithMargin) {
  double prev = INFINITY;
  for (int m = 0; m <= 20; ++m) {
    Tensor logits({1, 4});
    logits[2] = static_cast<float>(m) * 0.5f;
    const double l = cross_entropy(logits, std::vector<int>{2});
    EXPECT_LT(l, prev);
    prev = l;
  }
}

TEST(CrossEntropy, RejectsOutOfRangeLabel) {
  const Tensor logits({2, 3});
  EXPECT_THROW(cross_entropy(logits, std::vector<int>{0, 3}), LabelError);
  EXPECT_THROW(cross_entropy(logits, std::vector<int>{-1, 0}), LabelError);
  EXPECT_THROW(cross_entropy_backward(logits, std::vector<int>{0, 3}), LabelError);
}

TEST(Sgd, PlainStep) {
  Tensor p({3}, std::vector<float>{1.0f, -2.0f, 0.5f});
  const Tensor g({3}, std::vector<float>{0.5f, 1.0f, -1.0f});
  Tensor v({3});
  sgd_step(p, g, v, 0.1, 0.0, 0.0);
  EXPECT_FLOAT_EQ(p[0], 0.95f);
  EXPECT_FLOAT_EQ(p[1], -2.1f);
  EXPECT_FLOAT_EQ(p[2], 0.6f);
}

TEST(Sgd, MomentumOnly) {
  Tensor p({1}, 1.0f);
  const Tensor g({1});
  Tensor v({1}, 1.0f);
  sgd_step(p, g, v, 0.1, 0.9, 0.0);
  EXPECT_FLOAT_EQ(p[0], 1.0f - 0.09f);
  EXPECT_FLOAT_EQ(v[0], 0.9f);
}

TEST(Sgd, TwoStepRecurrence) {
  const double lr = 0.05, mu = 0.9, wd = 0.01, g1 = 0.3, g2 = -0.7, p0 = 1.5;
  Tensor p({1}, static_cast<float>(p0));
  Tensor v({1});
  sgd_step(p, Tensor({1}, static_cast<float>(g1)), v, lr, mu, wd);
  sgd_step(p, Tensor({1}, static_cast<float>(g2)), v, lr, mu, wd);
  const double v1 = g1 + wd * p0;
  const double p1 = p0 - lr * v1;
  const double v2 = mu * v1 + g2 + wd * p1;
  const double p2 = p1 - lr * v2;
  EXPECT_NEAR(p[0], p2, 1e-6);
  EXPECT_NEAR(v[0], v2, 1e-6);
}

TEST(CosineLr, Endpoints) {
  EXPECT_EQ(cosine_lr(0, 1000, 0.025, 0.001), 0.025);
  EXPECT_EQ(cosine_lr(1000, 1000, 0.025, 0.001), 0.001);
  EXPECT_NEAR(cosine_lr(500, 1000, 0.025, 0.001), 0.013, 1e-15);
}

TEST(CosineLr, MonotoneNonIncreasing) {
  double prev = cosine_lr(0, 1000, 0.025, 0.001);
  for (long t = 1; t <= 1000; ++t) {
    const double lr = cosine_lr(t, 1000, 0.025, 0.001);
    EXPECT_LE(lr, prev);
    prev = lr;
  }
}

TEST(CosineLr, RejectsBadRange) {
  EXPECT_THROW(cosine_lr(0, 0, 0.1, 0.01), ContractViolation);
  EXPECT_THROW(cosine_lr(11, 10, 0.1, 0.01), ContractViolation);
}

TEST(TrainHyperTest, Validation) {
  EXPECT_NO_THROW(TrainHyper{}.validate());
  EXPECT_THROW((TrainHyper{.lr_max = 0.001, .lr_min = 0.01}.validate()), ContractViolation);
  EXPECT_THROW((TrainHyper{.lr_min = 0.0}.validate()), ContractViolation);
  EXPECT_THROW((TrainHyper{.momentum = 1.0}.validate()), ContractViolation);
  EXPECT_THROW((TrainHyper{.weight_decay = -1e-4}.validate()), ContractViolation);
}

}  // namespace
}  // namespace rlnas::nn

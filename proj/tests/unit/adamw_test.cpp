// Copyright 2026 The brainalign Authors.
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

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "brainalign/error.hpp"
#include "brainalign/tensor/adamw.hpp"
#include "brainalign/tensor/ops.hpp"

namespace brainalign {
namespace {

// Sets the grad of a leaf to g by back-propagating sum(x * g).
void set_grad(Tensor& x, std::vector<double> g) {
  x.zero_grad();
  sum(mul(x, Tensor::from_values(g, x.shape(), x.dtype()))).backward();
}

TEST(AdamW, ZeroGradientNoDecayLeavesParams) {
  Tensor p = Tensor::from_values({1.5, -2.0}, {2}, DType::f64).set_requires_grad();
  AdamW opt({{p}}, {.lr = 0.1, .weight_decay = 0.0});
  set_grad(p, {0, 0});
  opt.step();
  EXPECT_EQ(p.to_vector(), (std::vector<double>{1.5, -2.0}));
}

TEST(AdamW, SingleUnitGradientStep) {
  Tensor p = Tensor::scalar(0.0, DType::f64).set_requires_grad();
  AdamW opt({{p}}, {.lr = 0.1, .weight_decay = 0.0, .beta1 = 0.9, .beta2 = 0.999, .eps = 1e-8});
  set_grad(p, {1.0});
  opt.step();
  // m_hat = 1, v_hat = 1: delta = -lr / (1 + eps).
  EXPECT_NEAR(p.item(), -0.1 / (1.0 + 1e-8), 1e-15);
  EXPECT_EQ(opt.step_count(), 1u);
}

TEST(AdamW, DecoupledDecayWithZeroGradient) {
  Tensor p = Tensor::from_values({2.0, -4.0}, {2}, DType::f64).set_requires_grad();
  AdamW opt({{p}}, {.lr = 0.01, .weight_decay = 1e-4});
  set_grad(p, {0, 0});
  opt.step();
  const double f = 1.0 - 0.01 * 1e-4;
  EXPECT_DOUBLE_EQ(p.to_vector()[0], 2.0 * f);
  EXPECT_DOUBLE_EQ(p.to_vector()[1], -4.0 * f);
}

TEST(AdamW, DecayExemptParam) {
  Tensor p = Tensor::scalar(2.0, DType::f64).set_requires_grad();
  AdamW opt({{p, false}}, {.lr = 0.01, .weight_decay = 0.5});
  set_grad(p, {0});
  opt.step();
  EXPECT_EQ(p.item(), 2.0);
}

TEST(AdamW, NonFiniteGradientRejectsWholeUpdate) {
  Tensor a = Tensor::scalar(1.0, DType::f64).set_requires_grad();
  Tensor b = Tensor::scalar(1.0, DType::f64).set_requires_grad();
  AdamW opt({{a}, {b}}, {.lr = 0.1});
  set_grad(a, {1.0});
  set_grad(b, {std::numeric_limits<double>::quiet_NaN()});
  EXPECT_THROW(opt.step(), NumericError);
  EXPECT_EQ(a.item(), 1.0);
  EXPECT_EQ(b.item(), 1.0);
  EXPECT_EQ(opt.step_count(), 0u);
  EXPECT_EQ(opt.first_moments()[0].item(), 0.0);
}

TEST(AdamW, StepCountIncrementsAndMomentsMirrorShapes) {
  Tensor p = Tensor::zeros({2, 3}, DType::f32).set_requires_grad();
  AdamW opt({{p}}, {});
  for (int i = 1; i <= 3; ++i) {
    set_grad(p, std::vector<double>(6, 0.5));
    opt.step();
    EXPECT_EQ(opt.step_count(), std::size_t(i));
  }
  EXPECT_EQ(opt.first_moments()[0].shape(), p.shape());
  EXPECT_EQ(opt.second_moments()[0].shape(), p.shape());
}

TEST(AdamW, RejectsBadHyperparameters) {
  Tensor p = Tensor::zeros({1}).set_requires_grad();
  EXPECT_THROW(AdamW({{p}}, {.beta1 = 1.0}), ContractError);
  EXPECT_THROW(AdamW({{p}}, {.eps = 0.0}), ContractError);
  EXPECT_THROW(AdamW({{scale(p, 2.0)}}, {}), ContractError);
}

TEST(AdamW, DescendsQuadratic) {
  Tensor p = Tensor::from_values({3.0, -2.0}, {2}, DType::f64).set_requires_grad();
  AdamW opt({{p}}, {.lr = 0.05, .weight_decay = 0.0});
  double first = 0, last = 0;
  for (int i = 0; i < 200; ++i) {
    opt.zero_grad();
    Tensor loss = sum(square(p));
    if (i == 0) first = loss.item();
    last = loss.item();
    loss.backward();
    opt.step();
  }
  EXPECT_LT(last, first * 1e-2);
}

}  // namespace
}  // namespace brainalign

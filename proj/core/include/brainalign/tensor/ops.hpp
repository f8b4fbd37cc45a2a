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

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "brainalign/tensor/tensor.hpp"

// Differentiable tensor operations. Every function records a backward
// closure when any input requires grad. Reductions run sequentially in
// row-major order so results are reproducible bit for bit.
namespace brainalign {

// [M,K] x [K,N] -> [M,N]
Tensor matmul(const Tensor& a, const Tensor& b);
// 2-D transpose.
Tensor transpose(const Tensor& a);

struct Conv2dOptions {
  std::size_t stride_h = 1, stride_w = 1;
  std::size_t pad_h = 0, pad_w = 0;
};
// Cross-correlation. x: [B,Cin,H,W], w: [Cout,Cin,kh,kw] -> [B,Cout,Ho,Wo]
// with Ho = (H + 2*pad_h - kh) / stride_h + 1. Zero padding.
Tensor conv2d(const Tensor& x, const Tensor& w, const Conv2dOptions& opt = {});

// Elementwise, identical shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
// a * s where s is a one-element tensor (differentiable in both).
Tensor mul_scalar(const Tensor& a, const Tensor& s);
// Adds a 1-D bias of length shape[axis] broadcast along every other axis.
Tensor add_bias(const Tensor& x, const Tensor& bias, std::size_t axis);

Tensor elu(const Tensor& a, double alpha = 1.0);
// Exact form x * Phi(x).
Tensor gelu(const Tensor& a);
Tensor exp(const Tensor& a);
// Throws NumericError on non-positive input unless eps is given, in which
// case log(max(x, eps)) is taken.
Tensor log(const Tensor& a, std::optional<double> eps = std::nullopt);
Tensor square(const Tensor& a);

// Full reductions to a scalar (shape {}).
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
// Reduction over one axis (removed from the shape).
Tensor sum(const Tensor& a, std::size_t axis);
Tensor mean(const Tensor& a, std::size_t axis);

// Non-overlapping-or-strided average pooling on [B,C,H,W]; trailing
// positions that do not fill a window are dropped.
Tensor avg_pool2d(const Tensor& x, std::size_t kh, std::size_t kw, std::size_t stride_h = 0,
                  std::size_t stride_w = 0);

// Inverted dropout. Identity (same node) when p == 0 or !training.
Tensor dropout(const Tensor& x, double p, std::uint64_t seed, bool training = true);

// Unit-normalizes each slice along the last axis. Without eps a zero-norm
// row raises NumericError; with eps the norm is floored at eps.
Tensor l2_normalize(const Tensor& x, std::optional<double> eps = std::nullopt);

// log(sum(exp(x))) across each row of a 2-D tensor -> [M].
Tensor logsumexp_rows(const Tensor& x);
// Diagonal of a square matrix -> [N].
Tensor diag(const Tensor& x);

Tensor reshape(const Tensor& x, Shape shape);
// Collapses axes [start, end) into one.
Tensor flatten(const Tensor& x, std::size_t start = 1);
// Stacks equal-shape tensors along a new leading axis.
Tensor stack(std::span<const Tensor> parts);
// Picks rows (first-axis slices) by index.
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> rows);

// x @ w + b for x: [B,in], w: [in,out], b: [out].
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);

}  // namespace brainalign

/*
 *  Copyright 2026 The fabnet Authors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 */

#pragma once

#include <span>

#include "fabnet/tape.hpp"
#include "fabnet/tensor.hpp"

// Differentiable ops. Each records its result on the tape of its operands;
// operands must live on the same tape (GraphError otherwise). Shape
// violations throw ShapeError.

namespace fabnet::ops {

/// out = a + b, same shapes only.
Var add(const Var& a, const Var& b);

/// out = a * b. `b` is either the shape of `a` or (N,1,1,C), in which case
/// it is broadcast over the spatial positions of `a`.
Var mul(const Var& a, const Var& b);

/// Per-channel mean over height and width: (N,H,W,C) -> (N,1,1,C).
Var mean_spatial(const Var& x);

/// Affine map on (N,1,1,Din). `weight` has shape (1,1,Dout,Din) and is
/// indexed [out][in]; `bias` has shape (1,1,1,Dout).
Var dense(const Var& x, const Var& weight, const Var& bias);

/// max(0, x). The subgradient at 0 is 0.
Var relu(const Var& x);

/// Logistic function, evaluated in the sign-branched form so that large
/// |x| never overflows.
Var sigmoid(const Var& x);

/// Stride-1 cross-correlation with zero "same" padding. `kernel` has shape
/// (Cout,K,K,Cin) with odd K; `bias` has shape (1,1,1,Cout).
Var conv2d(const Var& x, const Var& kernel, const Var& bias);

/// 2x2 max pool, stride 2. H and W must be even. Gradient goes to the first
/// maximum in row-major window order.
Var maxpool2x2(const Var& x);

/// Sum of all elements -> (1,1,1,1).
Var sum(const Var& x);

/// Mean over the batch of -log softmax(logits)[label], logits (N,1,1,K).
/// Throws ValueError for labels outside [0,K).
Var softmax_cross_entropy(const Var& logits, std::span<const int> labels);

/// Row-wise softmax of (N,1,1,K) logits, not recorded.
Tensor softmax(const Tensor& logits);

/// Stable logistic function on a single value.
double sigmoid(double x) noexcept;

} // namespace fabnet::ops

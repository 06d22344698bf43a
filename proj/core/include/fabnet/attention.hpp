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

#include <cstddef>
#include <vector>

#include "fabnet/rng.hpp"
#include "fabnet/tape.hpp"
#include "fabnet/tensor.hpp"

namespace fabnet {

/// Weights of a feature attention block over C channels.
///
/// The squeeze layer maps C -> C/ratio (`squeeze_weight` is (1,1,C/ratio,C)),
/// the excite layer maps back to C (`excite_weight` is (1,1,C,C/ratio)).
struct FabParams {
    Tensor squeeze_weight;
    Tensor squeeze_bias;
    Tensor excite_weight;
    Tensor excite_bias;
    std::size_t ratio = 8;

    std::size_t channels() const noexcept { return squeeze_weight.shape().channels; }
    std::size_t reduced() const noexcept { return squeeze_weight.shape().width; }

    /// Throws ConfigError if the tensors do not form a consistent block.
    void validate() const;
};

/// The four parameter tensors once recorded on a tape.
struct FabVars {
    Var squeeze_weight;
    Var squeeze_bias;
    Var excite_weight;
    Var excite_bias;
};

/// Every intermediate of one attention forward pass.
struct FabActivations {
    Var pooled;    ///< (N,1,1,C) spatial mean of the input
    Var squeezed;  ///< (N,1,1,C/ratio) after dense + ReLU
    Var gate;      ///< (N,1,1,C) after dense + sigmoid, values in (0,1)
    Var attended;  ///< (N,H,W,C) input scaled channel-wise by the gate
    Var out;       ///< (N,H,W,C) attended + input
};

/// Squeeze weights He-uniform (fan_in = C), excite weights Glorot-uniform,
/// zero biases. Throws ConfigError unless ratio divides C.
FabParams fab_init(std::size_t channels, std::size_t ratio, Rng& rng);

/// Records the parameters as leaves on `tape`.
FabVars fab_bind(Tape& tape, const FabParams& params, bool requires_grad = true);

/// Channel attention with a residual path:
///   pooled   = mean over (H,W) of x
///   squeezed = relu(W1 pooled + b1)
///   gate     = sigmoid(W2 squeezed + b2)
///   out      = gate * x + x
/// Throws ShapeError if x does not have the block's channel count.
FabActivations fab_forward(const Var& x, const FabVars& params);

/// Per-channel summary of the gate over the batch.
struct GateStats {
    std::vector<double> min;
    std::vector<double> mean;
    std::vector<double> max;
};

GateStats fab_gate_stats(const FabActivations& acts);

} // namespace fabnet

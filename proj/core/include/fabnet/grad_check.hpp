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

#include <functional>
#include <span>
#include <vector>

#include "fabnet/tape.hpp"

namespace fabnet {

/// Scalar function of one or more leaves, rebuilt on a fresh tape per call.
using ScalarFn = std::function<Var(Tape&, std::span<const Var>)>;

struct GradCheckResult {
    /// max over coordinates of |a - n| / max(1e-12, |a| + |n|).
    double max_relative_error = 0.0;
    std::size_t worst_input = 0;  ///< which input holds the worst coordinate
    std::size_t worst_index = 0;  ///< flat index inside that input
    double analytic = 0.0;
    double numeric = 0.0;

    /// max over inputs of ||a - n|| / (||a|| + ||n||) on whole tensors. Less
    /// sensitive to rounding in near-zero coordinates; reported for diagnosis.
    double max_tensor_error = 0.0;
};

/// Compares reverse-mode gradients of `f` at `inputs` against central
/// differences (f(x + eps e_i) - f(x - eps e_i)) / (2 eps) for every
/// coordinate of every input. Throws ValueError if eps <= 0 or f returns a
/// non-finite value.
GradCheckResult grad_check(const ScalarFn& f, std::span<const Tensor> inputs, double eps = 1e-5);

/// Single-input convenience form; returns max_relative_error.
double grad_check(const std::function<Var(Tape&, const Var&)>& f, const Tensor& x, double eps = 1e-5);

} // namespace fabnet

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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fabnet/grad_check.hpp"
#include "fabnet/tensor.hpp"

namespace fabnet::tools {

inline constexpr double kGradcheckTolerance = 1e-5;
inline constexpr double kGradcheckEps = 1e-5;

/// A scalar function of random inputs exercising one op or composite.
struct GradcheckCase {
    std::string name;
    std::vector<Tensor> inputs;
    ScalarFn fn;
};

/// Every differentiable op, the attention block and a small full model with
/// its loss. Inputs and loss weights are drawn from `seed`.
std::vector<GradcheckCase> gradcheck_cases(std::uint64_t seed);

struct GradcheckRow {
    std::string name;
    std::uint64_t seed = 0;
    double max_relative_error = 0.0;  ///< per-coordinate, the pass criterion
    double max_tensor_error = 0.0;    ///< norm-wise, for diagnosis
    bool passed = false;
};

/// Runs every case for every seed. A non-empty `corrupt_case` routes that
/// case's output through a node whose backward rule scales the gradient by
/// 1.5; it exists to exercise the failure path.
std::vector<GradcheckRow> run_gradcheck(std::span<const std::uint64_t> seeds, const std::string& corrupt_case = {});

} // namespace fabnet::tools

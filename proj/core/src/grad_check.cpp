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

#include "fabnet/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "fabnet/errors.hpp"

namespace fabnet {

namespace {

double evaluate(const ScalarFn& f, std::span<const Tensor> inputs)
{
    Tape tape;
    std::vector<Var> leaves;
    leaves.reserve(inputs.size());
    for (const Tensor& t : inputs) {
        leaves.push_back(tape.leaf(t));
    }
    const Var out = f(tape, leaves);
    if (out.value().size() != 1) {
        throw ShapeError("grad_check: function must return a scalar, got " + out.shape().str());
    }
    const double v = out.value()[0];
    if (!std::isfinite(v)) {
        throw ValueError("grad_check: function returned a non-finite value");
    }
    return v;
}

} // namespace

GradCheckResult grad_check(const ScalarFn& f, std::span<const Tensor> inputs, double eps)
{
    if (!(eps > 0.0)) {
        throw ValueError("grad_check: eps must be positive");
    }

    std::vector<Tensor> analytic;
    {
        Tape tape;
        std::vector<Var> leaves;
        for (const Tensor& t : inputs) {
            leaves.push_back(tape.leaf(t));
        }
        const Var out = f(tape, leaves);
        if (!std::isfinite(out.value()[0])) {
            throw ValueError("grad_check: function returned a non-finite value");
        }
        const GradientMap grads = tape.backward(out);
        for (const Var& leaf : leaves) {
            analytic.push_back(grads.at(leaf));
        }
    }

    GradCheckResult result;
    std::vector<Tensor> probe(inputs.begin(), inputs.end());
    for (std::size_t k = 0; k < probe.size(); ++k) {
        double diff_sq = 0.0;
        double analytic_sq = 0.0;
        double numeric_sq = 0.0;
        for (std::size_t i = 0; i < probe[k].size(); ++i) {
            const double saved = probe[k][i];
            probe[k][i] = saved + eps;
            const double up = evaluate(f, probe);
            probe[k][i] = saved - eps;
            const double down = evaluate(f, probe);
            probe[k][i] = saved;

            const double numeric = (up - down) / (2.0 * eps);
            const double a = analytic[k][i];
            diff_sq += (a - numeric) * (a - numeric);
            analytic_sq += a * a;
            numeric_sq += numeric * numeric;

            const double err = std::abs(a - numeric) / std::max(1e-12, std::abs(a) + std::abs(numeric));
            if (err > result.max_relative_error) {
                result.max_relative_error = err;
                result.worst_input = k;
                result.worst_index = i;
                result.analytic = a;
                result.numeric = numeric;
            }
        }
        const double scale = std::sqrt(analytic_sq) + std::sqrt(numeric_sq);
        result.max_tensor_error = std::max(result.max_tensor_error, scale > 0.0 ? std::sqrt(diff_sq) / scale : 0.0);
    }
    return result;
}

double grad_check(const std::function<Var(Tape&, const Var&)>& f, const Tensor& x, double eps)
{
    const ScalarFn wrapped = [&f](Tape& tape, std::span<const Var> leaves) { return f(tape, leaves[0]); };
    return grad_check(wrapped, std::span<const Tensor>(&x, 1), eps).max_relative_error;
}

} // namespace fabnet

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

#include "fabnet/attention.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "fabnet/errors.hpp"
#include "fabnet/init.hpp"
#include "fabnet/ops.hpp"

namespace fabnet {

void FabParams::validate() const
{
    const std::size_t C = channels();
    const std::size_t R = reduced();
    if (ratio == 0 || C % ratio != 0 || C / ratio != R) {
        throw ConfigError(fmt::format("attention block: ratio {} inconsistent with {} -> {} channels", ratio, C, R));
    }
    if (squeeze_weight.shape() != Shape4{1, 1, R, C} || squeeze_bias.shape() != Shape4{1, 1, 1, R} ||
        excite_weight.shape() != Shape4{1, 1, C, R} || excite_bias.shape() != Shape4{1, 1, 1, C}) {
        throw ConfigError("attention block: parameter shapes do not match");
    }
}

FabParams fab_init(std::size_t channels, std::size_t ratio, Rng& rng)
{
    if (channels == 0 || ratio == 0 || channels % ratio != 0) {
        throw ConfigError(fmt::format("attention ratio {} does not divide {} channels", ratio, channels));
    }
    const std::size_t reduced = channels / ratio;
    FabParams p;
    p.ratio = ratio;
    p.squeeze_weight = he_uniform(Shape4{1, 1, reduced, channels}, channels, rng);
    p.squeeze_bias = Tensor(Shape4{1, 1, 1, reduced});
    p.excite_weight = glorot_uniform(Shape4{1, 1, channels, reduced}, reduced, channels, rng);
    p.excite_bias = Tensor(Shape4{1, 1, 1, channels});
    return p;
}

FabVars fab_bind(Tape& tape, const FabParams& params, bool requires_grad)
{
    params.validate();
    return FabVars{tape.leaf(params.squeeze_weight, requires_grad), tape.leaf(params.squeeze_bias, requires_grad),
                   tape.leaf(params.excite_weight, requires_grad), tape.leaf(params.excite_bias, requires_grad)};
}

FabActivations fab_forward(const Var& x, const FabVars& params)
{
    const std::size_t C = params.squeeze_weight.shape().channels;
    if (x.shape().channels != C) {
        throw ShapeError(fmt::format("attention block expects {} channels, input is {}", C, x.shape().str()));
    }
    FabActivations a;
    a.pooled = ops::mean_spatial(x);
    a.squeezed = ops::relu(ops::dense(a.pooled, params.squeeze_weight, params.squeeze_bias));
    a.gate = ops::sigmoid(ops::dense(a.squeezed, params.excite_weight, params.excite_bias));
    a.attended = ops::mul(x, a.gate);
    a.out = ops::add(a.attended, x);
    return a;
}

GateStats fab_gate_stats(const FabActivations& acts)
{
    const Tensor& gate = acts.gate.value();
    const std::size_t N = gate.shape().batch;
    const std::size_t C = gate.shape().channels;
    GateStats s{std::vector<double>(C), std::vector<double>(C, 0.0), std::vector<double>(C)};
    for (std::size_t c = 0; c < C; ++c) {
        s.min[c] = gate[c];
        s.max[c] = gate[c];
    }
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t c = 0; c < C; ++c) {
            const double v = gate[n * C + c];
            s.min[c] = std::min(s.min[c], v);
            s.max[c] = std::max(s.max[c], v);
            s.mean[c] += v;
        }
    }
    for (double& m : s.mean) {
        m /= static_cast<double>(N);
    }
    return s;
}

} // namespace fabnet

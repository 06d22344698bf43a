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

#include "fabnet_tools/gradcheck_suite.hpp"

#include <cmath>

#include "fabnet/attention.hpp"
#include "fabnet/model.hpp"
#include "fabnet/ops.hpp"
#include "fabnet/rng.hpp"

namespace fabnet::tools {

namespace {

Tensor random_tensor(Shape4 shape, Rng& rng, double lo = -1.0, double hi = 1.0)
{
    Tensor t(shape);
    for (double& v : t.values()) {
        v = rng.uniform(lo, hi);
    }
    return t;
}

/// Values bounded away from 0 so a central difference never straddles the
/// ReLU kink.
Tensor away_from_zero(Shape4 shape, Rng& rng)
{
    Tensor t(shape);
    for (double& v : t.values()) {
        const double magnitude = rng.uniform(0.05, 1.0);
        v = rng.uniform() < 0.5 ? -magnitude : magnitude;
    }
    return t;
}

/// sum(v * w) for fixed random weights w, so every output element reaches
/// the loss with a distinct coefficient.
ScalarFn weighted(std::function<Var(std::span<const Var>)> op, Tensor weights)
{
    return [op = std::move(op), weights = std::move(weights)](Tape& tape, std::span<const Var> in) {
        return ops::sum(ops::mul(op(in), tape.constant(weights)));
    };
}

Var corrupt(const Var& v)
{
    return v.tape().record(v.value(), {v.id()}, [](const Tape&, const Tensor& upstream, std::span<Tensor* const> grads) {
        if (grads[0] == nullptr) {
            return;
        }
        for (std::size_t i = 0; i < upstream.size(); ++i) {
            (*grads[0])[i] += 1.5 * upstream[i];
        }
    });
}

/// A shuffled grid of values 0.01 apart, so no two entries of a pooling
/// window are within a finite-difference step of each other.
Tensor distinct_values(Shape4 shape, Rng& rng)
{
    Tensor t(shape);
    auto v = t.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = -1.0 + 0.01 * static_cast<double>(i);
    }
    rng.shuffle(v);
    return t;
}

ModelConfig tiny_model_config()
{
    ModelConfig c;
    c.input_height = 8;
    c.input_width = 8;
    c.in_channels = 3;
    c.blocks = {{4, true}, {8, true}};
    c.use_fab = true;
    c.fab_ratio = 2;
    c.head_hidden = 8;
    c.num_classes = 3;
    return c;
}

} // namespace

std::vector<GradcheckCase> gradcheck_cases(std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<GradcheckCase> cases;

    const Shape4 s{2, 3, 3, 4};
    cases.push_back({"add",
                     {random_tensor(s, rng), random_tensor(s, rng)},
                     weighted([](auto in) { return ops::add(in[0], in[1]); }, random_tensor(s, rng))});
    cases.push_back({"mul",
                     {random_tensor(s, rng), random_tensor(s, rng)},
                     weighted([](auto in) { return ops::mul(in[0], in[1]); }, random_tensor(s, rng))});
    cases.push_back({"mul_broadcast",
                     {random_tensor(s, rng), random_tensor(Shape4{2, 1, 1, 4}, rng)},
                     weighted([](auto in) { return ops::mul(in[0], in[1]); }, random_tensor(s, rng))});
    cases.push_back({"mean_spatial",
                     {random_tensor(Shape4{2, 4, 5, 3}, rng)},
                     weighted([](auto in) { return ops::mean_spatial(in[0]); }, random_tensor(Shape4{2, 1, 1, 3}, rng))});
    cases.push_back({"dense",
                     {random_tensor(Shape4{3, 1, 1, 5}, rng), random_tensor(Shape4{1, 1, 4, 5}, rng),
                      random_tensor(Shape4{1, 1, 1, 4}, rng)},
                     weighted([](auto in) { return ops::dense(in[0], in[1], in[2]); },
                              random_tensor(Shape4{3, 1, 1, 4}, rng))});
    cases.push_back({"relu",
                     {away_from_zero(s, rng)},
                     weighted([](auto in) { return ops::relu(in[0]); }, random_tensor(s, rng))});
    cases.push_back({"sigmoid",
                     {random_tensor(s, rng, -4.0, 4.0)},
                     weighted([](auto in) { return ops::sigmoid(in[0]); }, random_tensor(s, rng))});
    cases.push_back({"conv2d",
                     {random_tensor(Shape4{2, 5, 5, 3}, rng), random_tensor(Shape4{4, 3, 3, 3}, rng),
                      random_tensor(Shape4{1, 1, 1, 4}, rng)},
                     weighted([](auto in) { return ops::conv2d(in[0], in[1], in[2]); },
                              random_tensor(Shape4{2, 5, 5, 4}, rng))});
    cases.push_back({"maxpool2x2",
                     {distinct_values(Shape4{2, 4, 6, 3}, rng)},
                     weighted([](auto in) { return ops::maxpool2x2(in[0]); }, random_tensor(Shape4{2, 2, 3, 3}, rng))});
    cases.push_back({"sum", {random_tensor(s, rng)}, [](Tape&, std::span<const Var> in) { return ops::sum(in[0]); }});

    std::vector<int> labels(4);
    for (int& l : labels) {
        l = static_cast<int>(rng.below(5));
    }
    cases.push_back({"softmax_cross_entropy",
                     {random_tensor(Shape4{4, 1, 1, 5}, rng, -3.0, 3.0)},
                     [labels](Tape&, std::span<const Var> in) { return ops::softmax_cross_entropy(in[0], labels); }});

    FabParams fab = fab_init(8, 2, rng);
    for (double& v : fab.squeeze_bias.values()) {
        v = rng.uniform(-0.1, 0.1);
    }
    for (double& v : fab.excite_bias.values()) {
        v = rng.uniform(-0.1, 0.1);
    }
    // Nonnegative input, as the block sees after ReLU and pooling.
    cases.push_back({"feature_attention",
                     {random_tensor(Shape4{2, 4, 4, 8}, rng, 0.0, 2.0), fab.squeeze_weight, fab.squeeze_bias,
                      fab.excite_weight, fab.excite_bias},
                     [](Tape&, std::span<const Var> in) {
                         return ops::sum(fab_forward(in[0], FabVars{in[1], in[2], in[3], in[4]}).out);
                     }});

    const ModelConfig mc = tiny_model_config();
    Model model = build_model(mc, rng.next());
    std::vector<Tensor> inputs{random_tensor(Shape4{2, mc.input_height, mc.input_width, mc.in_channels}, rng, 0.0, 1.0)};
    for (auto& p : model.parameters()) {
        inputs.push_back(p.value);
    }
    const std::vector<int> model_labels{static_cast<int>(rng.below(3)), static_cast<int>(rng.below(3))};
    cases.push_back({"model_loss", std::move(inputs),
                     [model = std::move(model), model_labels](Tape&, std::span<const Var> in) {
                         std::vector<Var> params(in.begin() + 1, in.end());
                         const ModelOutput out = model.forward(in[0], std::move(params));
                         return ops::softmax_cross_entropy(out.logits, model_labels);
                     }});
    return cases;
}

std::vector<GradcheckRow> run_gradcheck(std::span<const std::uint64_t> seeds, const std::string& corrupt_case)
{
    std::vector<GradcheckRow> rows;
    for (const auto seed : seeds) {
        for (auto& c : gradcheck_cases(seed)) {
            ScalarFn fn = c.fn;
            if (c.name == corrupt_case) {
                fn = [inner = c.fn](Tape& tape, std::span<const Var> in) { return corrupt(inner(tape, in)); };
            }
            const GradCheckResult r = grad_check(fn, c.inputs, kGradcheckEps);
            rows.push_back({c.name, seed, r.max_relative_error, r.max_tensor_error, r.max_relative_error < kGradcheckTolerance});
        }
    }
    return rows;
}

} // namespace fabnet::tools

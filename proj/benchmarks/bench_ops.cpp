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

#include <vector>

#include <benchmark/benchmark.h>

#include "fabnet/attention.hpp"
#include "fabnet/model.hpp"
#include "fabnet/ops.hpp"
#include "fabnet/rng.hpp"
#include "fabnet/tape.hpp"
#include "fabnet/train.hpp"

namespace {

using namespace fabnet;

Tensor random_tensor(Shape4 shape, Rng& rng)
{
    Tensor t(shape);
    for (double& v : t.values()) {
        v = rng.uniform(-1.0, 1.0);
    }
    return t;
}

// Args: spatial size, input channels, output channels. Batch of 16.
void BM_Conv2dForward(benchmark::State& state)
{
    const auto size = static_cast<std::size_t>(state.range(0));
    const auto cin = static_cast<std::size_t>(state.range(1));
    const auto cout = static_cast<std::size_t>(state.range(2));
    Rng rng(1);
    const Tensor x = random_tensor(Shape4{16, size, size, cin}, rng);
    const Tensor k = random_tensor(Shape4{cout, 3, 3, cin}, rng);
    const Tensor b = random_tensor(Shape4{1, 1, 1, cout}, rng);
    for (auto _ : state) {
        Tape t;
        benchmark::DoNotOptimize(ops::conv2d(t.leaf(x), t.leaf(k), t.leaf(b)).value().data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(16 * size * size * cout * 9 * cin));
}
BENCHMARK(BM_Conv2dForward)->Args({32, 3, 16})->Args({16, 16, 32})->Args({8, 32, 64});

void BM_Conv2dBackward(benchmark::State& state)
{
    const auto size = static_cast<std::size_t>(state.range(0));
    const auto cin = static_cast<std::size_t>(state.range(1));
    const auto cout = static_cast<std::size_t>(state.range(2));
    Rng rng(2);
    const Tensor x = random_tensor(Shape4{16, size, size, cin}, rng);
    const Tensor k = random_tensor(Shape4{cout, 3, 3, cin}, rng);
    const Tensor b = random_tensor(Shape4{1, 1, 1, cout}, rng);
    for (auto _ : state) {
        Tape t;
        const Var loss = ops::sum(ops::conv2d(t.leaf(x), t.leaf(k), t.leaf(b)));
        benchmark::DoNotOptimize(t.backward(loss));
    }
}
BENCHMARK(BM_Conv2dBackward)->Args({32, 3, 16})->Args({16, 16, 32})->Args({8, 32, 64});

// Args: spatial size, channels. Ratio 8, batch of 16.
void BM_AttentionForward(benchmark::State& state)
{
    const auto size = static_cast<std::size_t>(state.range(0));
    const auto channels = static_cast<std::size_t>(state.range(1));
    Rng rng(3);
    const FabParams p = fab_init(channels, 8, rng);
    const Tensor x = random_tensor(Shape4{16, size, size, channels}, rng);
    for (auto _ : state) {
        Tape t;
        benchmark::DoNotOptimize(fab_forward(t.leaf(x), fab_bind(t, p)).out.value().data());
    }
}
BENCHMARK(BM_AttentionForward)->Args({4, 64})->Args({16, 64})->Args({28, 512});

// One forward, backward and Adam update of the default model on a batch of 16.
void BM_TrainStep(benchmark::State& state)
{
    ModelConfig config;
    config.use_fab = state.range(0) != 0;
    Model model = build_model(config, 4);
    Rng rng(4);
    const Tensor x = random_tensor(Shape4{16, config.input_height, config.input_width, 3}, rng);
    std::vector<int> labels(16);
    for (int& l : labels) {
        l = static_cast<int>(rng.below(config.num_classes));
    }
    AdamState adam;
    for (auto _ : state) {
        Tape t;
        const ModelOutput out = model.forward(t, t.constant(x));
        const GradientMap grads = t.backward(ops::softmax_cross_entropy(out.logits, labels));
        std::vector<Tensor*> params;
        std::vector<const Tensor*> gradients;
        for (std::size_t i = 0; i < model.parameters().size(); ++i) {
            params.push_back(&model.parameters()[i].value);
            gradients.push_back(&grads.at(out.params[i]));
        }
        adam_step(params, gradients, adam, AdamHyper{});
    }
}
BENCHMARK(BM_TrainStep)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();

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

#include "fabnet/train.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "fabnet/checkpoint.hpp"
#include "fabnet/errors.hpp"
#include "fabnet/ops.hpp"

namespace fabnet {

namespace {

constexpr std::size_t kEvalChunk = 64;

std::vector<std::size_t> iota(std::size_t n)
{
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), std::size_t{0});
    return v;
}

std::size_t count_correct(const Tensor& logits, std::span<const int> labels)
{
    const auto predicted = argmax_rows(logits);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        correct += predicted[i] == labels[i] ? 1 : 0;
    }
    return correct;
}

double batch_loss(const Tensor& logits, std::span<const int> labels)
{
    Tape tape;
    return ops::softmax_cross_entropy(tape.constant(logits), labels).value()[0];
}

} // namespace

void TrainConfig::validate() const
{
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw ConfigError(fmt::format("learning_rate must be a finite value >= 0, got {}", learning_rate));
    }
    if (batch_size < 1) {
        throw ConfigError("batch_size must be at least 1");
    }
    if (max_epochs < 1) {
        throw ConfigError("max_epochs must be at least 1");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw ConfigError(fmt::format("Adam betas must lie in [0,1), got {} and {}", beta1, beta2));
    }
    if (!(epsilon > 0.0)) {
        throw ConfigError(fmt::format("Adam epsilon must be positive, got {}", epsilon));
    }
}

void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads, AdamState& state,
               const AdamHyper& hyper)
{
    if (params.size() != grads.size()) {
        throw ShapeError(fmt::format("{} parameters but {} gradients", params.size(), grads.size()));
    }
    if (state.step == 0 && state.m.empty()) {
        for (const Tensor* p : params) {
            state.m.emplace_back(p->shape());
            state.v.emplace_back(p->shape());
        }
    }
    if (state.m.size() != params.size() || state.v.size() != params.size()) {
        throw ShapeError(fmt::format("optimizer state holds {} moments for {} parameters", state.m.size(), params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (grads[i]->shape() != params[i]->shape() || state.m[i].shape() != params[i]->shape()) {
            throw ShapeError(fmt::format("parameter {} has shape {} but gradient {} and moment {}", i,
                                         params[i]->shape().str(), grads[i]->shape().str(), state.m[i].shape().str()));
        }
    }

    ++state.step;
    const auto t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(hyper.beta1, t);
    const double correction2 = 1.0 - std::pow(hyper.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto p = params[i]->values();
        const auto g = grads[i]->values();
        auto m = state.m[i].values();
        auto v = state.v[i].values();
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = hyper.beta1 * m[j] + (1.0 - hyper.beta1) * g[j];
            v[j] = hyper.beta2 * v[j] + (1.0 - hyper.beta2) * g[j] * g[j];
            const double m_hat = m[j] / correction1;
            const double v_hat = v[j] / correction2;
            p[j] -= hyper.learning_rate * m_hat / (std::sqrt(v_hat) + hyper.epsilon);
        }
    }
}

std::string EpochCurve::csv() const
{
    std::string out = "epoch,train_loss,train_acc,val_loss,val_acc\n";
    for (const auto& r : records) {
        out += fmt::format("{},{},{},{},{}\n", r.epoch, r.train_loss, r.train_acc, r.val_loss, r.val_acc);
    }
    return out;
}

std::vector<int> argmax_rows(const Tensor& logits)
{
    const Shape4& s = logits.shape();
    const std::size_t k = s.height * s.width * s.channels;
    std::vector<int> out(s.batch);
    for (std::size_t n = 0; n < s.batch; ++n) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < k; ++c) {
            if (logits[n * k + c] > logits[n * k + best]) {
                best = c;
            }
        }
        out[n] = static_cast<int>(best);
    }
    return out;
}

std::vector<int> predict(const Model& model, const SampleSet& samples)
{
    std::vector<int> out;
    out.reserve(samples.size());
    const auto all = iota(samples.size());
    for (std::size_t start = 0; start < all.size(); start += kEvalChunk) {
        const auto chunk = std::span(all).subspan(start, std::min(kEvalChunk, all.size() - start));
        const auto p = argmax_rows(model.logits(samples.batch(chunk)));
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

MetricsReport evaluate(const Model& model, const SampleSet& samples)
{
    if (samples.size() == 0) {
        throw ValueError("evaluate needs at least one sample");
    }
    std::vector<int> predicted;
    predicted.reserve(samples.size());
    double loss_sum = 0.0;
    const auto all = iota(samples.size());
    for (std::size_t start = 0; start < all.size(); start += kEvalChunk) {
        const auto chunk = std::span(all).subspan(start, std::min(kEvalChunk, all.size() - start));
        const Tensor logits = model.logits(samples.batch(chunk));
        const auto labels = samples.batch_labels(chunk);
        loss_sum += batch_loss(logits, labels) * static_cast<double>(chunk.size());
        const auto p = argmax_rows(logits);
        predicted.insert(predicted.end(), p.begin(), p.end());
    }
    MetricsReport report = compute_metrics(samples.labels, predicted, model.config().num_classes);
    report.loss = loss_sum / static_cast<double>(samples.size());
    return report;
}

EpochCurve train(Model& model, const SampleSet& train_set, const SampleSet& val_set, const TrainConfig& config,
                 const EpochCallback& on_epoch)
{
    config.validate();
    if (train_set.size() == 0 || val_set.size() == 0) {
        throw ValueError("training needs non-empty train and validation sets");
    }

    const AdamHyper hyper{config.learning_rate, config.beta1, config.beta2, config.epsilon};
    std::vector<std::size_t> trainable;
    for (std::size_t i = 0; i < model.parameters().size(); ++i) {
        if (model.parameters()[i].trainable) {
            trainable.push_back(i);
        }
    }

    AdamState state;
    EpochCurve curve;
    const auto all = iota(train_set.size());
    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        double loss_sum = 0.0;
        std::size_t correct = 0;
        const auto batches = batch_iterator(all, config.batch_size, config.seed, epoch);
        for (std::size_t b = 0; b < batches.size(); ++b) {
            const auto& idx = batches[b];
            const auto labels = train_set.batch_labels(idx);

            Tape tape;
            const ModelOutput out = model.forward(tape, tape.constant(train_set.batch(idx)));
            const Var loss = ops::softmax_cross_entropy(out.logits, labels);
            const double value = loss.value()[0];
            if (!std::isfinite(value)) {
                throw DivergenceError(epoch, b + 1, value);
            }
            loss_sum += value * static_cast<double>(idx.size());
            correct += count_correct(out.logits.value(), labels);

            if (trainable.empty()) {
                continue;
            }
            const GradientMap grads = tape.backward(loss);
            std::vector<Tensor*> p;
            std::vector<const Tensor*> g;
            for (const auto i : trainable) {
                p.push_back(&model.parameters()[i].value);
                g.push_back(&grads.at(out.params[i]));
            }
            adam_step(p, g, state, hyper);
        }

        const MetricsReport val = evaluate(model, val_set);
        EpochRecord record;
        record.epoch = epoch;
        record.train_loss = loss_sum / static_cast<double>(train_set.size());
        record.train_acc = static_cast<double>(correct) / static_cast<double>(train_set.size());
        record.val_loss = *val.loss;
        record.val_acc = val.accuracy;
        curve.records.push_back(record);
        if (on_epoch) {
            on_epoch(record);
        }
    }
    return curve;
}

std::string AblationReport::csv() const
{
    std::string out = "seed,accuracy_with_fab,accuracy_without_fab,diff_confined\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{}\n", r.seed, r.accuracy_with, r.accuracy_without, r.diff_confined ? 1 : 0);
    }
    out += fmt::format("mean,{},{},\n", mean_with, mean_without);
    return out;
}

AblationRow ablation_pair(const DatasetManifest& manifest, const SampleSet& samples, const ModelConfig& first,
                          const ModelConfig& second, const TrainConfig& config, std::uint64_t seed,
                          double test_fraction)
{
    const Split split = stratified_split(manifest, SplitSpec{test_fraction, true, seed});
    const SampleSet train_set = samples.subset(split.train);
    const SampleSet test_set = samples.subset(split.test);
    TrainConfig cfg = config;
    cfg.seed = seed;

    const auto run = [&](const ModelConfig& mc) {
        Model model = build_model(mc, seed, manifest.class_names);
        train(model, train_set, test_set, cfg);
        const double accuracy = evaluate(model, test_set).accuracy;
        return std::pair{std::move(model), accuracy};
    };
    auto [model_a, accuracy_a] = run(first);
    auto [model_b, accuracy_b] = run(second);

    AblationRow row;
    row.seed = seed;
    row.accuracy_with = accuracy_a;
    row.accuracy_without = accuracy_b;
    row.diff_confined = diff_checkpoints(model_a, model_b).confined_to_attention();
    return row;
}

AblationReport ablation_run(const DatasetManifest& manifest, const SampleSet& samples, const ModelConfig& model_config,
                            const TrainConfig& config, std::span<const std::uint64_t> seeds, double test_fraction,
                            const AblationCallback& on_row)
{
    if (seeds.empty()) {
        throw ValueError("ablation needs at least one seed");
    }
    ModelConfig with = model_config;
    with.use_fab = true;
    ModelConfig without = model_config;
    without.use_fab = false;

    AblationReport report;
    for (const auto seed : seeds) {
        report.rows.push_back(ablation_pair(manifest, samples, with, without, config, seed, test_fraction));
        report.mean_with += report.rows.back().accuracy_with;
        report.mean_without += report.rows.back().accuracy_without;
        if (on_row) {
            on_row(report.rows.back());
        }
    }
    report.mean_with /= static_cast<double>(seeds.size());
    report.mean_without /= static_cast<double>(seeds.size());
    return report;
}

} // namespace fabnet

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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fabnet/dataset.hpp"
#include "fabnet/metrics.hpp"
#include "fabnet/model.hpp"

namespace fabnet {

enum class Optimizer { adam };
enum class LossKind { categorical_cross_entropy };

struct TrainConfig {
    double learning_rate = 1e-4;
    std::size_t batch_size = 16;
    std::size_t max_epochs = 40;
    Optimizer optimizer = Optimizer::adam;
    LossKind loss = LossKind::categorical_cross_entropy;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;

    /// ConfigError unless lr >= 0, batch_size >= 1, max_epochs >= 1 and the
    /// Adam constants are in range. lr = 0 is allowed as a null step.
    void validate() const;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct AdamHyper {
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// First and second moments per parameter, plus the step count.
struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    std::uint64_t step = 0;
};

/// One bias-corrected Adam update of every tensor in `params`. Moments are
/// created on the first call. ShapeError if a gradient's shape differs from
/// its parameter or the counts disagree with each other or with the state.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor* const> grads, AdamState& state,
               const AdamHyper& hyper);

struct EpochRecord {
    std::size_t epoch = 0;  ///< 1-based
    double train_loss = 0.0;
    double train_acc = 0.0;
    double val_loss = 0.0;
    double val_acc = 0.0;

    friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct EpochCurve {
    std::vector<EpochRecord> records;

    /// `epoch,train_loss,train_acc,val_loss,val_acc` plus one row per epoch,
    /// doubles in shortest round-trip form.
    std::string csv() const;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch Adam on the model's trainable parameters. Batch order comes
/// from batch_iterator(seed, epoch). train_loss/acc average the per-batch
/// values weighted by batch size, measured before each update; val_* come
/// from evaluate() after the epoch. DivergenceError on a non-finite loss.
EpochCurve train(Model& model, const SampleSet& train_set, const SampleSet& val_set, const TrainConfig& config,
                 const EpochCallback& on_epoch = {});

/// Argmax of each row, lowest index on ties.
std::vector<int> argmax_rows(const Tensor& logits);

/// Predicted class per sample, evaluated in fixed-size chunks.
std::vector<int> predict(const Model& model, const SampleSet& samples);

/// Metrics plus mean cross-entropy over `samples`. ValueError if empty.
MetricsReport evaluate(const Model& model, const SampleSet& samples);

struct AblationRow {
    std::uint64_t seed = 0;
    double accuracy_with = 0.0;
    double accuracy_without = 0.0;
    bool diff_confined = false;  ///< trained checkpoints differ only in attention entries
};

struct AblationReport {
    std::vector<AblationRow> rows;
    double mean_with = 0.0;
    double mean_without = 0.0;

    /// 100 * (mean_with - mean_without).
    double mean_difference_points() const noexcept { return 100.0 * (mean_with - mean_without); }
    std::string csv() const;
};

/// One paired run: `first` and `second` are built from `seed`, share the
/// split and batch order, and are trained with `config` (seed replaced).
/// `accuracy_with` belongs to `first`.
AblationRow ablation_pair(const DatasetManifest& manifest, const SampleSet& samples, const ModelConfig& first,
                          const ModelConfig& second, const TrainConfig& config, std::uint64_t seed,
                          double test_fraction = 0.2);

using AblationCallback = std::function<void(const AblationRow&)>;

/// For every seed: one stratified split and batch order shared by two
/// models that differ only in use_fab, both built from that seed and trained
/// with `config` (its seed replaced). Accuracies are test-split accuracies.
AblationReport ablation_run(const DatasetManifest& manifest, const SampleSet& samples, const ModelConfig& model_config,
                            const TrainConfig& config, std::span<const std::uint64_t> seeds,
                            double test_fraction = 0.2, const AblationCallback& on_row = {});

} // namespace fabnet

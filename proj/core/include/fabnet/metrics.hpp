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

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fabnet {

/// K x K counts; rows are the true class, columns the predicted class.
class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::size_t num_classes);

    std::size_t num_classes() const noexcept { return k_; }
    void add(int truth, int predicted);

    std::size_t at(std::size_t truth, std::size_t predicted) const { return counts_.at(truth * k_ + predicted); }
    std::size_t total() const noexcept;
    std::size_t trace() const noexcept;
    std::size_t row_sum(std::size_t truth) const;
    std::size_t col_sum(std::size_t predicted) const;

    /// K lines of K comma-separated counts.
    std::string csv() const;

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    std::size_t k_ = 0;
    std::vector<std::size_t> counts_;
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool precision_undefined = false;  ///< nothing predicted as this class (0/0 -> 0)
    bool recall_undefined = false;     ///< class absent from the ground truth (0/0 -> 0)

    friend bool operator==(const ClassMetrics&, const ClassMetrics&) = default;
};

struct MetricsReport {
    double accuracy = 0.0;
    std::vector<ClassMetrics> per_class;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double top1_error_percent = 100.0;  ///< always 100 - 100 * accuracy
    ConfusionMatrix confusion;
    std::optional<double> loss;  ///< mean cross-entropy when computed from a model
};

/// 100 - 100 * accuracy.
double top1_error_percent(double accuracy) noexcept;

/// Metrics from label vectors. Throws ValueError on a length mismatch, an
/// empty input or labels outside [0,K).
MetricsReport compute_metrics(std::span<const int> truth, std::span<const int> predicted, std::size_t num_classes);

/// `class,precision,recall,f1` rows per class, then `accuracy,<v>` and
/// `top1_error,<v>`.
std::string metrics_csv(const MetricsReport& report, std::span<const std::string> class_names);

/// Human-readable summary including macro averages and 0/0 flags.
std::string metrics_text(const MetricsReport& report, std::span<const std::string> class_names);

} // namespace fabnet

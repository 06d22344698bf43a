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

#include "fabnet/metrics.hpp"

#include <fmt/format.h>

#include "fabnet/errors.hpp"

namespace fabnet {

ConfusionMatrix::ConfusionMatrix(std::size_t num_classes) : k_(num_classes), counts_(num_classes * num_classes, 0) {}

void ConfusionMatrix::add(int truth, int predicted)
{
    const auto k = static_cast<int>(k_);
    if (truth < 0 || truth >= k || predicted < 0 || predicted >= k) {
        throw ValueError(fmt::format("confusion entry ({},{}) outside a {}-class matrix", truth, predicted, k_));
    }
    ++counts_[static_cast<std::size_t>(truth) * k_ + static_cast<std::size_t>(predicted)];
}

std::size_t ConfusionMatrix::total() const noexcept
{
    std::size_t t = 0;
    for (const auto c : counts_) {
        t += c;
    }
    return t;
}

std::size_t ConfusionMatrix::trace() const noexcept
{
    std::size_t t = 0;
    for (std::size_t i = 0; i < k_; ++i) {
        t += counts_[i * k_ + i];
    }
    return t;
}

std::size_t ConfusionMatrix::row_sum(std::size_t truth) const
{
    std::size_t s = 0;
    for (std::size_t j = 0; j < k_; ++j) {
        s += at(truth, j);
    }
    return s;
}

std::size_t ConfusionMatrix::col_sum(std::size_t predicted) const
{
    std::size_t s = 0;
    for (std::size_t i = 0; i < k_; ++i) {
        s += at(i, predicted);
    }
    return s;
}

std::string ConfusionMatrix::csv() const
{
    std::string out;
    for (std::size_t i = 0; i < k_; ++i) {
        for (std::size_t j = 0; j < k_; ++j) {
            if (j > 0) {
                out += ',';
            }
            out += fmt::format("{}", at(i, j));
        }
        out += '\n';
    }
    return out;
}

double top1_error_percent(double accuracy) noexcept
{
    return 100.0 - 100.0 * accuracy;
}

MetricsReport compute_metrics(std::span<const int> truth, std::span<const int> predicted, std::size_t num_classes)
{
    if (truth.size() != predicted.size()) {
        throw ValueError(fmt::format("{} labels vs {} predictions", truth.size(), predicted.size()));
    }
    if (truth.empty()) {
        throw ValueError("metrics need at least one sample");
    }

    MetricsReport r;
    r.confusion = ConfusionMatrix(num_classes);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        r.confusion.add(truth[i], predicted[i]);
    }

    const auto total = static_cast<double>(r.confusion.total());
    r.accuracy = static_cast<double>(r.confusion.trace()) / total;
    r.top1_error_percent = top1_error_percent(r.accuracy);

    r.per_class.resize(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
        ClassMetrics& m = r.per_class[c];
        const auto tp = static_cast<double>(r.confusion.at(c, c));
        const std::size_t predicted_c = r.confusion.col_sum(c);
        const std::size_t actual_c = r.confusion.row_sum(c);
        m.precision_undefined = predicted_c == 0;
        m.recall_undefined = actual_c == 0;
        m.precision = m.precision_undefined ? 0.0 : tp / static_cast<double>(predicted_c);
        m.recall = m.recall_undefined ? 0.0 : tp / static_cast<double>(actual_c);
        m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
        r.macro_precision += m.precision;
        r.macro_recall += m.recall;
        r.macro_f1 += m.f1;
    }
    const auto k = static_cast<double>(num_classes);
    r.macro_precision /= k;
    r.macro_recall /= k;
    r.macro_f1 /= k;
    return r;
}

std::string metrics_csv(const MetricsReport& report, std::span<const std::string> class_names)
{
    std::string out = "class,precision,recall,f1\n";
    for (std::size_t c = 0; c < report.per_class.size(); ++c) {
        const auto& m = report.per_class[c];
        out += fmt::format("{},{},{},{}\n", class_names[c], m.precision, m.recall, m.f1);
    }
    out += fmt::format("accuracy,{}\n", report.accuracy);
    out += fmt::format("top1_error,{}\n", report.top1_error_percent);
    return out;
}

std::string metrics_text(const MetricsReport& report, std::span<const std::string> class_names)
{
    std::string out;
    out += fmt::format("samples:          {}\n", report.confusion.total());
    out += fmt::format("accuracy:         {:.4f}\n", report.accuracy);
    out += fmt::format("top-1 error (%):  {:.2f}\n", report.top1_error_percent);
    if (report.loss) {
        out += fmt::format("loss:             {:.6f}\n", *report.loss);
    }
    out += fmt::format("macro precision:  {:.4f}\n", report.macro_precision);
    out += fmt::format("macro recall:     {:.4f}\n", report.macro_recall);
    out += fmt::format("macro F1:         {:.4f}\n", report.macro_f1);
    out += fmt::format("{:<20} {:>9} {:>9} {:>9}\n", "class", "precision", "recall", "f1");
    for (std::size_t c = 0; c < report.per_class.size(); ++c) {
        const auto& m = report.per_class[c];
        std::string note;
        if (m.precision_undefined) {
            note += " [precision 0/0]";
        }
        if (m.recall_undefined) {
            note += " [recall 0/0]";
        }
        out += fmt::format("{:<20} {:>9.4f} {:>9.4f} {:>9.4f}{}\n", class_names[c], m.precision, m.recall, m.f1, note);
    }
    return out;
}

} // namespace fabnet

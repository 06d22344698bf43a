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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "fabnet/attention.hpp"
#include "fabnet/metrics.hpp"
#include "fabnet/tensor.hpp"

// Direct loop implementations used as references for the recorded ops.
namespace fabnet::testing {

inline Tensor naive_mean_spatial(const Tensor& x)
{
    const Shape4 s = x.shape();
    Tensor out(Shape4{s.batch, 1, 1, s.channels});
    for (std::size_t n = 0; n < s.batch; ++n) {
        for (std::size_t c = 0; c < s.channels; ++c) {
            double total = 0.0;
            for (std::size_t h = 0; h < s.height; ++h) {
                for (std::size_t w = 0; w < s.width; ++w) {
                    total += x.at(n, h, w, c);
                }
            }
            out.at(n, 0, 0, c) = total / static_cast<double>(s.height * s.width);
        }
    }
    return out;
}

inline Tensor naive_conv2d(const Tensor& x, const Tensor& kernel, const Tensor& bias)
{
    const Shape4 s = x.shape();
    const Shape4 k = kernel.shape();
    const auto pad = static_cast<std::ptrdiff_t>(k.height / 2);
    Tensor out(Shape4{s.batch, s.height, s.width, k.batch});
    for (std::size_t n = 0; n < s.batch; ++n) {
        for (std::size_t h = 0; h < s.height; ++h) {
            for (std::size_t w = 0; w < s.width; ++w) {
                for (std::size_t o = 0; o < k.batch; ++o) {
                    double acc = bias[o];
                    for (std::size_t i = 0; i < k.height; ++i) {
                        for (std::size_t j = 0; j < k.width; ++j) {
                            const auto ih = static_cast<std::ptrdiff_t>(h + i) - pad;
                            const auto iw = static_cast<std::ptrdiff_t>(w + j) - pad;
                            if (ih < 0 || iw < 0 || ih >= static_cast<std::ptrdiff_t>(s.height) ||
                                iw >= static_cast<std::ptrdiff_t>(s.width)) {
                                continue;
                            }
                            for (std::size_t c = 0; c < s.channels; ++c) {
                                acc += kernel.at(o, i, j, c) *
                                       x.at(n, static_cast<std::size_t>(ih), static_cast<std::size_t>(iw), c);
                            }
                        }
                    }
                    out.at(n, h, w, o) = acc;
                }
            }
        }
    }
    return out;
}

inline Tensor naive_dense(const Tensor& x, const Tensor& weight, const Tensor& bias)
{
    const std::size_t n_out = weight.shape().width;
    const std::size_t n_in = weight.shape().channels;
    Tensor out(Shape4{x.shape().batch, 1, 1, n_out});
    for (std::size_t n = 0; n < x.shape().batch; ++n) {
        for (std::size_t o = 0; o < n_out; ++o) {
            double acc = bias[o];
            for (std::size_t i = 0; i < n_in; ++i) {
                acc += weight.at(0, 0, o, i) * x.at(n, 0, 0, i);
            }
            out.at(n, 0, 0, o) = acc;
        }
    }
    return out;
}

inline Tensor naive_maxpool2x2(const Tensor& x)
{
    const Shape4 s = x.shape();
    Tensor out(Shape4{s.batch, s.height / 2, s.width / 2, s.channels});
    for (std::size_t n = 0; n < s.batch; ++n) {
        for (std::size_t h = 0; h < s.height / 2; ++h) {
            for (std::size_t w = 0; w < s.width / 2; ++w) {
                for (std::size_t c = 0; c < s.channels; ++c) {
                    out.at(n, h, w, c) = std::max({x.at(n, 2 * h, 2 * w, c), x.at(n, 2 * h, 2 * w + 1, c),
                                                   x.at(n, 2 * h + 1, 2 * w, c), x.at(n, 2 * h + 1, 2 * w + 1, c)});
                }
            }
        }
    }
    return out;
}

/// out = x * sigmoid(W2 relu(W1 mean(x) + b1) + b2) + x, written out per
/// element.
inline Tensor naive_fab(const Tensor& x, const FabParams& p)
{
    const Shape4 s = x.shape();
    const std::size_t C = s.channels;
    const std::size_t R = p.reduced();
    const Tensor pooled = naive_mean_spatial(x);
    Tensor out(s);
    for (std::size_t n = 0; n < s.batch; ++n) {
        std::vector<double> hidden(R);
        for (std::size_t r = 0; r < R; ++r) {
            double acc = p.squeeze_bias[r];
            for (std::size_t c = 0; c < C; ++c) {
                acc += p.squeeze_weight.at(0, 0, r, c) * pooled.at(n, 0, 0, c);
            }
            hidden[r] = acc > 0.0 ? acc : 0.0;
        }
        std::vector<double> gate(C);
        for (std::size_t c = 0; c < C; ++c) {
            double acc = p.excite_bias[c];
            for (std::size_t r = 0; r < R; ++r) {
                acc += p.excite_weight.at(0, 0, c, r) * hidden[r];
            }
            gate[c] = 1.0 / (1.0 + std::exp(-acc));
        }
        for (std::size_t h = 0; h < s.height; ++h) {
            for (std::size_t w = 0; w < s.width; ++w) {
                for (std::size_t c = 0; c < C; ++c) {
                    const double v = x.at(n, h, w, c);
                    out.at(n, h, w, c) = v * gate[c] + v;
                }
            }
        }
    }
    return out;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a[i] - b[i]));
    }
    return worst;
}

/// Per-class scores counted sample by sample, without a confusion matrix.
struct NaiveScores {
    double accuracy = 0.0;
    std::vector<ClassMetrics> per_class;
};

inline NaiveScores naive_scores(const std::vector<int>& truth, const std::vector<int>& predicted, std::size_t k)
{
    NaiveScores s;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        correct += truth[i] == predicted[i] ? 1 : 0;
    }
    s.accuracy = static_cast<double>(correct) / static_cast<double>(truth.size());
    for (std::size_t c = 0; c < k; ++c) {
        const int label = static_cast<int>(c);
        std::size_t tp = 0;
        std::size_t fp = 0;
        std::size_t fn = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            tp += truth[i] == label && predicted[i] == label ? 1 : 0;
            fp += truth[i] != label && predicted[i] == label ? 1 : 0;
            fn += truth[i] == label && predicted[i] != label ? 1 : 0;
        }
        ClassMetrics m;
        m.precision_undefined = tp + fp == 0;
        m.recall_undefined = tp + fn == 0;
        m.precision = m.precision_undefined ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
        m.recall = m.recall_undefined ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
        m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
        s.per_class.push_back(m);
    }
    return s;
}

} // namespace fabnet::testing

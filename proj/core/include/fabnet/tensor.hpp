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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fabnet {

/// Extents of a rank-4 tensor in (batch, height, width, channels) order.
struct Shape4 {
    std::size_t batch = 1;
    std::size_t height = 1;
    std::size_t width = 1;
    std::size_t channels = 1;

    /// Element count. Call validate() first if the extents are untrusted.
    std::size_t size() const noexcept { return batch * height * width * channels; }

    /// Throws ShapeError if an extent is zero or the element count overflows.
    void validate() const;

    std::size_t index(std::size_t b, std::size_t h, std::size_t w, std::size_t c) const noexcept
    {
        return ((b * height + h) * width + w) * channels + c;
    }

    std::string str() const;

    friend bool operator==(const Shape4&, const Shape4&) = default;
};

/// Dense row-major NHWC array of doubles.
class Tensor {
public:
    /// A single zero, shape (1,1,1,1).
    Tensor() : values_(1, 0.0) {}

    /// Tensor of `shape` filled with `fill`.
    explicit Tensor(Shape4 shape, double fill = 0.0);

    /// Checked construction: the value count must match the shape and every
    /// value must be finite (ShapeError / ValueError otherwise).
    Tensor(Shape4 shape, std::vector<double> values);

    static Tensor scalar(double v) { return Tensor(Shape4{}, v); }

    const Shape4& shape() const noexcept { return shape_; }
    std::size_t size() const noexcept { return values_.size(); }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    const double* data() const noexcept { return values_.data(); }
    double* data() noexcept { return values_.data(); }

    double operator[](std::size_t i) const noexcept { return values_[i]; }
    double& operator[](std::size_t i) noexcept { return values_[i]; }

    double at(std::size_t b, std::size_t h, std::size_t w, std::size_t c) const noexcept
    {
        return values_[shape_.index(b, h, w, c)];
    }
    double& at(std::size_t b, std::size_t h, std::size_t w, std::size_t c) noexcept
    {
        return values_[shape_.index(b, h, w, c)];
    }

    bool all_finite() const noexcept;

    /// Sample `b` as a (1,H,W,C) tensor.
    Tensor slice_batch(std::size_t b) const;

    /// Stacks (1,H,W,C) samples along the batch axis.
    static Tensor stack(std::span<const Tensor* const> samples);

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    Shape4 shape_;
    std::vector<double> values_;
};

} // namespace fabnet

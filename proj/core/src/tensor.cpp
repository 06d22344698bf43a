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

#include "fabnet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "fabnet/errors.hpp"

namespace fabnet {

void Shape4::validate() const
{
    const std::size_t extents[] = {batch, height, width, channels};
    std::size_t count = 1;
    for (const auto e : extents) {
        if (e == 0) {
            throw ShapeError("zero extent in shape " + str());
        }
        if (count > std::numeric_limits<std::size_t>::max() / e) {
            throw ShapeError("element count overflows for shape " + str());
        }
        count *= e;
    }
}

std::string Shape4::str() const
{
    return fmt::format("({},{},{},{})", batch, height, width, channels);
}

Tensor::Tensor(Shape4 shape, double fill) : shape_(shape)
{
    shape_.validate();
    values_.assign(shape_.size(), fill);
}

Tensor::Tensor(Shape4 shape, std::vector<double> values) : shape_(shape), values_(std::move(values))
{
    shape_.validate();
    if (values_.size() != shape_.size()) {
        throw ShapeError(fmt::format("{} values given for shape {} ({} elements)", values_.size(), shape_.str(),
                                     shape_.size()));
    }
    if (!all_finite()) {
        throw ValueError("non-finite value in tensor of shape " + shape_.str());
    }
}

bool Tensor::all_finite() const noexcept
{
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Tensor Tensor::slice_batch(std::size_t b) const
{
    if (b >= shape_.batch) {
        throw ShapeError(fmt::format("batch index {} out of range for {}", b, shape_.str()));
    }
    Tensor out(Shape4{1, shape_.height, shape_.width, shape_.channels});
    const auto stride = out.size();
    std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(b * stride), stride, out.values_.begin());
    return out;
}

Tensor Tensor::stack(std::span<const Tensor* const> samples)
{
    if (samples.empty()) {
        throw ShapeError("cannot stack an empty sample list");
    }
    const Shape4 first = samples.front()->shape();
    if (first.batch != 1) {
        throw ShapeError("stack expects (1,H,W,C) samples, got " + first.str());
    }
    Tensor out(Shape4{samples.size(), first.height, first.width, first.channels});
    auto dst = out.values_.begin();
    for (const Tensor* s : samples) {
        if (s->shape() != first) {
            throw ShapeError("stack shape mismatch: " + s->shape().str() + " vs " + first.str());
        }
        dst = std::copy(s->values_.begin(), s->values_.end(), dst);
    }
    return out;
}

} // namespace fabnet

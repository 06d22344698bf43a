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

#include "fabnet/init.hpp"

#include <cmath>

namespace fabnet {

namespace {

Tensor uniform_fill(Shape4 shape, double limit, Rng& rng)
{
    Tensor t(shape);
    for (double& v : t.values()) {
        v = rng.uniform(-limit, limit);
    }
    return t;
}

} // namespace

Tensor he_uniform(Shape4 shape, std::size_t fan_in, Rng& rng)
{
    return uniform_fill(shape, std::sqrt(6.0 / static_cast<double>(fan_in)), rng);
}

Tensor glorot_uniform(Shape4 shape, std::size_t fan_in, std::size_t fan_out, Rng& rng)
{
    return uniform_fill(shape, std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)), rng);
}

} // namespace fabnet

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

#include "fabnet/rng.hpp"
#include "fabnet/tensor.hpp"

namespace fabnet {

/// U(-sqrt(6/fan_in), sqrt(6/fan_in)), for layers followed by ReLU.
Tensor he_uniform(Shape4 shape, std::size_t fan_in, Rng& rng);

/// U(-sqrt(6/(fan_in+fan_out)), +...), for sigmoid/softmax outputs.
Tensor glorot_uniform(Shape4 shape, std::size_t fan_in, std::size_t fan_out, Rng& rng);

} // namespace fabnet

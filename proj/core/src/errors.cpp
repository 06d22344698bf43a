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

#include "fabnet/errors.hpp"

#include <fmt/format.h>

namespace fabnet {

DivergenceError::DivergenceError(std::size_t epoch, std::size_t batch, double loss)
    : Error(fmt::format("training diverged at epoch {}, batch {}: loss = {}", epoch, batch, loss))
    , epoch_(epoch)
    , batch_(batch)
{
}

} // namespace fabnet

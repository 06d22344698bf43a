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

#include <stdexcept>
#include <string>

namespace fabnet {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define FABNET_DECLARE_ERROR(Name)          \
    class Name : public Error {             \
    public:                                 \
        using Error::Error;                 \
    }

FABNET_DECLARE_ERROR(ShapeError);
FABNET_DECLARE_ERROR(ValueError);
FABNET_DECLARE_ERROR(GraphError);
FABNET_DECLARE_ERROR(ConfigError);
FABNET_DECLARE_ERROR(FormatError);
FABNET_DECLARE_ERROR(ManifestError);
FABNET_DECLARE_ERROR(ImageFormatError);
FABNET_DECLARE_ERROR(SplitError);
FABNET_DECLARE_ERROR(IoError);

#undef FABNET_DECLARE_ERROR

/// Raised by the training loop when the loss stops being finite.
class DivergenceError : public Error {
public:
    DivergenceError(std::size_t epoch, std::size_t batch, double loss);

    std::size_t epoch() const noexcept { return epoch_; }
    std::size_t batch() const noexcept { return batch_; }

private:
    std::size_t epoch_;
    std::size_t batch_;
};

} // namespace fabnet

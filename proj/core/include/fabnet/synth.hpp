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
#include <filesystem>

#include "fabnet/image.hpp"

namespace fabnet {

struct SynthOptions {
    std::size_t classes = 5;
    std::size_t per_class = 40;
    std::size_t height = 32;
    std::size_t width = 32;
    std::uint64_t seed = 0;
    /// 0 keeps the class hues apart; towards 1 the hue jitter spans the
    /// neighbouring classes and pixel noise grows, so blob count and size
    /// have to carry the decision.
    double difficulty = 0.0;
    /// Write P5 images instead of P6.
    bool grayscale = false;
};

/// Image `index` of class `label` on a dark noisy background: 1 + label
/// disks (mod 5) of a class radius band and hue, with seeded jitter.
RawImage synth_image(const SynthOptions& options, std::size_t label, std::size_t index);

/// Writes `<dir>/<class>/<index>.ppm` (or .pgm) for every image and
/// `<dir>/manifest.csv` with paths relative to `dir`. Classes are named
/// "class_00", "class_01", ... so their lexicographic order is their id.
/// Returns the manifest path. IoError if the directory cannot be written,
/// ConfigError if classes < 2 or a count/extent is zero.
std::filesystem::path synth_generate(const std::filesystem::path& dir, const SynthOptions& options);

} // namespace fabnet

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
#include <string>
#include <string_view>
#include <vector>

#include "fabnet/tensor.hpp"

namespace fabnet {

/// 8-bit RGB pixels, row-major, 3 bytes per pixel.
struct RawImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> rgb;

    std::uint8_t at(std::size_t y, std::size_t x, std::size_t c) const { return rgb[(y * width + x) * 3 + c]; }

    friend bool operator==(const RawImage&, const RawImage&) = default;
};

/// Binary PPM (P6) or PGM (P5) with maxval 255. Gray images are expanded to
/// three identical channels. Throws ImageFormatError.
RawImage decode_pnm(std::string_view bytes);

/// Reads and decodes a file; IoError if it cannot be read.
RawImage decode_image(const std::filesystem::path& path);

std::string encode_ppm(const RawImage& image);

/// P5 of the first channel.
std::string encode_pgm(const RawImage& image);

/// Bilinear resize to (height, width) with half-pixel centers, then / 255.
/// Returns a (1,height,width,3) tensor with values in [0,1].
Tensor preprocess(const RawImage& image, std::size_t height, std::size_t width);

} // namespace fabnet

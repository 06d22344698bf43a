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

#include "fabnet/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>

#include <fmt/format.h>

#include "fabnet/errors.hpp"

namespace fabnet {

namespace {

class HeaderParser {
public:
    explicit HeaderParser(std::string_view bytes) : bytes_(bytes) {}

    // Skips whitespace and '#' comments, then reads a decimal field.
    std::size_t number(const char* what)
    {
        skip_space();
        std::size_t value = 0;
        std::size_t digits = 0;
        while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
            if (value > (std::numeric_limits<std::size_t>::max() - 9) / 10) {
                throw ImageFormatError(fmt::format("image header: {} too large", what));
            }
            value = value * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
            ++pos_;
            ++digits;
        }
        if (digits == 0) {
            throw ImageFormatError(fmt::format("image header: missing {}", what));
        }
        return value;
    }

    // Exactly one whitespace byte separates the header from the raster.
    std::size_t raster_start()
    {
        if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
            throw ImageFormatError("image header: missing separator before pixel data");
        }
        return pos_ + 1;
    }

private:
    void skip_space()
    {
        while (pos_ < bytes_.size()) {
            const char c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
                    ++pos_;
                }
            }
            else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            }
            else {
                break;
            }
        }
    }

    std::string_view bytes_;
    std::size_t pos_ = 2;
};

} // namespace

RawImage decode_pnm(std::string_view bytes)
{
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '6' && bytes[1] != '5')) {
        throw ImageFormatError("not a binary PPM/PGM: bad magic");
    }
    const bool gray = bytes[1] == '5';
    HeaderParser header(bytes);
    RawImage img;
    img.width = header.number("width");
    img.height = header.number("height");
    const std::size_t maxval = header.number("maxval");
    if (maxval != 255) {
        throw ImageFormatError(fmt::format("unsupported maxval {} (only 255)", maxval));
    }
    if (img.width == 0 || img.height == 0) {
        throw ImageFormatError("image has a zero extent");
    }
    if (img.width > std::numeric_limits<std::uint32_t>::max() / img.height) {
        throw ImageFormatError(fmt::format("image {}x{} is too large", img.width, img.height));
    }
    const std::size_t start = header.raster_start();
    const std::size_t pixels = img.width * img.height;
    const std::size_t need = pixels * (gray ? 1 : 3);
    if (bytes.size() - start < need) {
        throw ImageFormatError(
            fmt::format("truncated pixel data: {} bytes, expected {}", bytes.size() - start, need));
    }

    const auto* raster = reinterpret_cast<const std::uint8_t*>(bytes.data() + start);
    if (gray) {
        img.rgb.resize(pixels * 3);
        for (std::size_t i = 0; i < pixels; ++i) {
            img.rgb[3 * i] = img.rgb[3 * i + 1] = img.rgb[3 * i + 2] = raster[i];
        }
    }
    else {
        img.rgb.assign(raster, raster + need);
    }
    return img;
}

RawImage decode_image(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(fmt::format("cannot open image {}", path.string()));
    }
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_pnm(bytes);
    }
    catch (const ImageFormatError& e) {
        throw ImageFormatError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

std::string encode_ppm(const RawImage& image)
{
    std::string out = fmt::format("P6\n{} {}\n255\n", image.width, image.height);
    out.append(image.rgb.begin(), image.rgb.end());
    return out;
}

std::string encode_pgm(const RawImage& image)
{
    std::string out = fmt::format("P5\n{} {}\n255\n", image.width, image.height);
    for (std::size_t i = 0; i < image.width * image.height; ++i) {
        out.push_back(static_cast<char>(image.rgb[3 * i]));
    }
    return out;
}

Tensor preprocess(const RawImage& image, std::size_t height, std::size_t width)
{
    Tensor out(Shape4{1, height, width, 3});
    const double sy = static_cast<double>(image.height) / static_cast<double>(height);
    const double sx = static_cast<double>(image.width) / static_cast<double>(width);
    const double ymax = static_cast<double>(image.height - 1);
    const double xmax = static_cast<double>(image.width - 1);

    for (std::size_t y = 0; y < height; ++y) {
        const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0, ymax);
        const auto y0 = static_cast<std::size_t>(fy);
        const std::size_t y1 = std::min(y0 + 1, image.height - 1);
        const double ty = fy - static_cast<double>(y0);
        for (std::size_t x = 0; x < width; ++x) {
            const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0, xmax);
            const auto x0 = static_cast<std::size_t>(fx);
            const std::size_t x1 = std::min(x0 + 1, image.width - 1);
            const double tx = fx - static_cast<double>(x0);
            for (std::size_t c = 0; c < 3; ++c) {
                // a + t (b - a) keeps constant regions exact.
                const double a = image.at(y0, x0, c);
                const double b = image.at(y0, x1, c);
                const double d = image.at(y1, x0, c);
                const double e = image.at(y1, x1, c);
                const double top = a + tx * (b - a);
                const double bottom = d + tx * (e - d);
                out.at(0, y, x, c) = (top + ty * (bottom - top)) / 255.0;
            }
        }
    }
    return out;
}

} // namespace fabnet

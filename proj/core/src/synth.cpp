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

#include "fabnet/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "fabnet/errors.hpp"
#include "fabnet/rng.hpp"

namespace fabnet {

namespace {

std::array<double, 3> hsv_to_rgb(double hue, double sat, double val)
{
    hue = std::fmod(hue, 360.0);
    if (hue < 0.0) {
        hue += 360.0;
    }
    const double c = val * sat;
    const double h = hue / 60.0;
    const double x = c * (1.0 - std::abs(std::fmod(h, 2.0) - 1.0));
    std::array<double, 3> rgb{};
    switch (static_cast<int>(h)) {
    case 0: rgb = {c, x, 0}; break;
    case 1: rgb = {x, c, 0}; break;
    case 2: rgb = {0, c, x}; break;
    case 3: rgb = {0, x, c}; break;
    case 4: rgb = {x, 0, c}; break;
    default: rgb = {c, 0, x}; break;
    }
    const double m = val - c;
    for (double& v : rgb) {
        v = (v + m) * 255.0;
    }
    return rgb;
}

std::uint8_t to_byte(double v)
{
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

std::string class_name(std::size_t k)
{
    return fmt::format("class_{:02}", k);
}

} // namespace

RawImage synth_image(const SynthOptions& o, std::size_t label, std::size_t index)
{
    Rng rng = Rng(o.seed).derive(label * 1000003ULL + index);
    const double d = std::clamp(o.difficulty, 0.0, 1.0);
    const double extent = static_cast<double>(std::min(o.height, o.width));

    RawImage img;
    img.width = o.width;
    img.height = o.height;
    std::vector<double> canvas(o.width * o.height * 3);

    const std::array<double, 3> background{rng.uniform(10, 60), rng.uniform(10, 60), rng.uniform(10, 60)};
    for (std::size_t i = 0; i < canvas.size(); ++i) {
        canvas[i] = background[i % 3];
    }

    const std::size_t blobs = 1 + label % 5;
    const double radius_scale = 0.06 + 0.035 * static_cast<double>(label % 3);
    const double hue_step = 360.0 / static_cast<double>(o.classes);
    const double base_hue = hue_step * static_cast<double>(label);

    for (std::size_t b = 0; b < blobs; ++b) {
        const double radius = std::max(1.0, extent * radius_scale * rng.uniform(0.85, 1.15));
        const double cy = rng.uniform(radius, static_cast<double>(o.height) - radius);
        const double cx = rng.uniform(radius, static_cast<double>(o.width) - radius);
        const double hue = base_hue + rng.uniform(-1.0, 1.0) * (0.15 + 0.85 * d) * hue_step;
        const auto color = hsv_to_rgb(hue, rng.uniform(0.6, 0.95), rng.uniform(0.75, 1.0));
        for (std::size_t y = 0; y < o.height; ++y) {
            for (std::size_t x = 0; x < o.width; ++x) {
                const double dy = static_cast<double>(y) + 0.5 - cy;
                const double dx = static_cast<double>(x) + 0.5 - cx;
                if (dy * dy + dx * dx <= radius * radius) {
                    std::copy(color.begin(), color.end(), canvas.begin() + static_cast<std::ptrdiff_t>((y * o.width + x) * 3));
                }
            }
        }
    }

    const double noise = 12.0 + 48.0 * d;
    img.rgb.resize(canvas.size());
    for (std::size_t i = 0; i < canvas.size(); ++i) {
        img.rgb[i] = to_byte(canvas[i] + rng.uniform(-noise, noise));
    }
    if (o.grayscale) {
        for (std::size_t p = 0; p < o.width * o.height; ++p) {
            const double luma = 0.299 * img.rgb[3 * p] + 0.587 * img.rgb[3 * p + 1] + 0.114 * img.rgb[3 * p + 2];
            img.rgb[3 * p] = img.rgb[3 * p + 1] = img.rgb[3 * p + 2] = to_byte(luma);
        }
    }
    return img;
}

std::filesystem::path synth_generate(const std::filesystem::path& dir, const SynthOptions& o)
{
    if (o.classes < 2) {
        throw ConfigError(fmt::format("need at least 2 classes, got {}", o.classes));
    }
    if (o.per_class == 0 || o.height == 0 || o.width == 0) {
        throw ConfigError("per-class count and image size must be positive");
    }

    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
    }

    const char* ext = o.grayscale ? ".pgm" : ".ppm";
    std::string manifest = "path,label\n";
    for (std::size_t k = 0; k < o.classes; ++k) {
        const std::string name = class_name(k);
        std::filesystem::create_directories(dir / name, ec);
        if (ec) {
            throw IoError(fmt::format("cannot create {}: {}", (dir / name).string(), ec.message()));
        }
        for (std::size_t i = 0; i < o.per_class; ++i) {
            const std::string rel = fmt::format("{}/{:04}{}", name, i, ext);
            const RawImage img = synth_image(o, k, i);
            const std::string bytes = o.grayscale ? encode_pgm(img) : encode_ppm(img);
            std::ofstream out(dir / rel, std::ios::binary | std::ios::trunc);
            out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
            if (!out) {
                throw IoError(fmt::format("cannot write {}", (dir / rel).string()));
            }
            manifest += fmt::format("{},{}\n", rel, name);
        }
    }

    const auto manifest_path = dir / "manifest.csv";
    std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
    out << manifest;
    if (!out) {
        throw IoError(fmt::format("cannot write {}", manifest_path.string()));
    }
    return manifest_path;
}

} // namespace fabnet

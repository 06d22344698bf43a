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

#include "fabnet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <fmt/format.h>

#include "fabnet/errors.hpp"
#include "fabnet/image.hpp"
#include "fabnet/rng.hpp"

namespace fabnet {

std::vector<std::size_t> DatasetManifest::class_counts() const
{
    std::vector<std::size_t> counts(class_names.size(), 0);
    for (const auto& e : entries) {
        ++counts[static_cast<std::size_t>(e.label_id)];
    }
    return counts;
}

DatasetManifest DatasetManifest::from_rows(std::vector<std::pair<std::filesystem::path, std::string>> rows)
{
    if (rows.empty()) {
        throw ManifestError("manifest has no entries");
    }
    std::set<std::string> labels;
    std::set<std::filesystem::path> seen;
    for (const auto& [path, label] : rows) {
        if (label.empty()) {
            throw ManifestError(fmt::format("empty class label for {}", path.string()));
        }
        if (!seen.insert(path.lexically_normal()).second) {
            throw ManifestError(fmt::format("duplicate path {}", path.string()));
        }
        labels.insert(label);
    }

    DatasetManifest m;
    m.class_names.assign(labels.begin(), labels.end());
    std::map<std::string, int> ids;
    for (std::size_t i = 0; i < m.class_names.size(); ++i) {
        ids[m.class_names[i]] = static_cast<int>(i);
    }
    m.entries.reserve(rows.size());
    for (auto& [path, label] : rows) {
        const int id = ids.at(label);
        m.entries.push_back(ManifestEntry{std::move(path), std::move(label), id});
    }
    return m;
}

DatasetManifest DatasetManifest::subset(std::span<const std::size_t> indices) const
{
    DatasetManifest m;
    m.class_names = class_names;
    for (const auto i : indices) {
        m.entries.push_back(entries.at(i));
    }
    return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ManifestError(fmt::format("cannot open manifest {}", path.string()));
    }
    const std::filesystem::path base = path.parent_path();

    std::string line;
    std::size_t line_no = 0;
    const auto next = [&]() {
        if (!std::getline(in, line)) {
            return false;
        }
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        return true;
    };

    if (!next()) {
        throw ManifestError(fmt::format("{}: empty manifest", path.string()));
    }
    if (line.starts_with("\xEF\xBB\xBF")) {
        line.erase(0, 3);
    }
    if (line != "path,label") {
        throw ManifestError(fmt::format("{}: expected header 'path,label', got '{}'", path.string(), line));
    }

    std::vector<std::pair<std::filesystem::path, std::string>> rows;
    while (next()) {
        if (line.empty()) {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
            throw ManifestError(fmt::format("{}:{}: expected exactly one comma", path.string(), line_no));
        }
        std::filesystem::path p = line.substr(0, comma);
        if (p.empty()) {
            throw ManifestError(fmt::format("{}:{}: empty path", path.string(), line_no));
        }
        if (p.is_relative()) {
            p = base / p;
        }
        rows.emplace_back(std::move(p), line.substr(comma + 1));
    }
    try {
        return DatasetManifest::from_rows(std::move(rows));
    }
    catch (const ManifestError& e) {
        throw ManifestError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(fmt::format("cannot open {} for writing", path.string()));
    }
    out << "path,label\n";
    for (const auto& e : manifest.entries) {
        out << e.path.string() << ',' << e.label << '\n';
    }
    if (!out) {
        throw IoError(fmt::format("failed writing {}", path.string()));
    }
}

Split stratified_split(const DatasetManifest& manifest, const SplitSpec& spec)
{
    if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
        throw SplitError(fmt::format("test fraction {} outside (0,1)", spec.test_fraction));
    }

    const auto pick = [&](std::vector<std::size_t>& members, Rng& rng, Split& split) {
        const std::size_t n = members.size();
        auto n_test = static_cast<std::size_t>(std::round(spec.test_fraction * static_cast<double>(n)));
        n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
        rng.shuffle(std::span<std::size_t>(members));
        split.test.insert(split.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
        split.train.insert(split.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
    };

    Split split;
    Rng rng(spec.seed);
    if (spec.stratified) {
        std::vector<std::vector<std::size_t>> by_class(manifest.num_classes());
        for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
            by_class[static_cast<std::size_t>(manifest.entries[i].label_id)].push_back(i);
        }
        for (std::size_t c = 0; c < by_class.size(); ++c) {
            if (by_class[c].size() < 2) {
                throw SplitError(fmt::format("class '{}' has {} entries; a stratified split needs at least 2",
                                             manifest.class_names[c], by_class[c].size()));
            }
            pick(by_class[c], rng, split);
        }
    }
    else {
        if (manifest.entries.size() < 2) {
            throw SplitError("a split needs at least 2 entries");
        }
        std::vector<std::size_t> all(manifest.entries.size());
        for (std::size_t i = 0; i < all.size(); ++i) {
            all[i] = i;
        }
        pick(all, rng, split);
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

std::vector<std::vector<std::size_t>> batch_iterator(std::span<const std::size_t> indices, std::size_t batch_size,
                                                     std::uint64_t shuffle_seed, std::uint64_t epoch)
{
    if (batch_size == 0) {
        throw ValueError("batch size must be at least 1");
    }
    std::vector<std::size_t> order(indices.begin(), indices.end());
    Rng rng = Rng(shuffle_seed).derive(epoch);
    rng.shuffle(std::span<std::size_t>(order));

    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t end = std::min(order.size(), start + batch_size);
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

Tensor SampleSet::batch(std::span<const std::size_t> indices) const
{
    std::vector<const Tensor*> parts;
    parts.reserve(indices.size());
    for (const auto i : indices) {
        parts.push_back(&pixels.at(i));
    }
    return Tensor::stack(parts);
}

std::vector<int> SampleSet::batch_labels(std::span<const std::size_t> indices) const
{
    std::vector<int> out;
    out.reserve(indices.size());
    for (const auto i : indices) {
        out.push_back(labels.at(i));
    }
    return out;
}

SampleSet SampleSet::subset(std::span<const std::size_t> indices) const
{
    SampleSet s;
    for (const auto i : indices) {
        s.pixels.push_back(pixels.at(i));
        s.labels.push_back(labels.at(i));
    }
    return s;
}

SampleSet load_samples(const DatasetManifest& manifest, std::size_t height, std::size_t width)
{
    SampleSet s;
    s.pixels.reserve(manifest.entries.size());
    s.labels.reserve(manifest.entries.size());
    for (const auto& e : manifest.entries) {
        s.pixels.push_back(preprocess(decode_image(e.path), height, width));
        s.labels.push_back(e.label_id);
    }
    return s;
}

} // namespace fabnet

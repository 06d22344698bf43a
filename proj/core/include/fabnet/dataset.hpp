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
#include <span>
#include <string>
#include <vector>

#include "fabnet/tensor.hpp"

namespace fabnet {

struct ManifestEntry {
    std::filesystem::path path;  ///< resolved against the manifest's directory
    std::string label;
    int label_id = 0;
};

/// Labeled image list. Class ids follow the lexicographic order of the
/// label strings.
struct DatasetManifest {
    std::vector<ManifestEntry> entries;
    std::vector<std::string> class_names;

    std::size_t num_classes() const noexcept { return class_names.size(); }

    /// Entry count per class id.
    std::vector<std::size_t> class_counts() const;

    /// Builds a manifest from (path, label) rows; ManifestError on duplicate
    /// paths, empty labels, or no rows at all.
    static DatasetManifest from_rows(std::vector<std::pair<std::filesystem::path, std::string>> rows);

    /// Same class list, only the entries at `indices`.
    DatasetManifest subset(std::span<const std::size_t> indices) const;
};

/// Reads a `path,label` CSV. Relative paths are resolved against the
/// manifest's directory. ManifestError on any malformed input.
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Writes `path,label` rows. Paths are written as stored.
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

struct SplitSpec {
    double test_fraction = 0.2;
    bool stratified = true;
    std::uint64_t seed = 0;
};

struct Split {
    std::vector<std::size_t> train;  ///< ascending manifest indices
    std::vector<std::size_t> test;   ///< ascending manifest indices
};

/// Per class, round(test_fraction * n_c) entries (at least 1, at most
/// n_c - 1) go to test, picked by a seeded shuffle within the class.
/// SplitError if a class has fewer than 2 entries or the fraction is not in
/// (0,1).
Split stratified_split(const DatasetManifest& manifest, const SplitSpec& spec);

/// Seeded, epoch-dependent shuffle of `indices` cut into batches; the last
/// batch may be short.
std::vector<std::vector<std::size_t>> batch_iterator(std::span<const std::size_t> indices, std::size_t batch_size,
                                                     std::uint64_t shuffle_seed, std::uint64_t epoch);

/// Decoded, preprocessed samples held in memory.
struct SampleSet {
    std::vector<Tensor> pixels;  ///< each (1,H,W,3), values in [0,1]
    std::vector<int> labels;

    std::size_t size() const noexcept { return labels.size(); }

    /// Stacks the samples at `indices` into one (N,H,W,3) batch.
    Tensor batch(std::span<const std::size_t> indices) const;
    std::vector<int> batch_labels(std::span<const std::size_t> indices) const;

    SampleSet subset(std::span<const std::size_t> indices) const;
};

/// Decodes and preprocesses every entry of the manifest.
SampleSet load_samples(const DatasetManifest& manifest, std::size_t height, std::size_t width);

} // namespace fabnet

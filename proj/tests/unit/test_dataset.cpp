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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "fabnet/dataset.hpp"
#include "fabnet/errors.hpp"
#include "fabnet/image.hpp"
#include "test_support.hpp"

namespace fabnet {
namespace {

namespace fs = std::filesystem;

DatasetManifest counts_manifest(const std::vector<std::pair<std::string, std::size_t>>& counts)
{
    std::vector<std::pair<fs::path, std::string>> rows;
    for (const auto& [label, n] : counts) {
        for (std::size_t i = 0; i < n; ++i) {
            rows.emplace_back(fs::path(label) / (std::to_string(i) + ".ppm"), label);
        }
    }
    return DatasetManifest::from_rows(std::move(rows));
}

std::vector<std::size_t> iota(std::size_t n)
{
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), 0);
    return v;
}

TEST(Manifest, LexicographicIds)
{
    testing::TempDir dir("manifest");
    testing::write_file(dir / "m.csv", "path,label\nb.ppm,dog\na.ppm,cat\n");
    const DatasetManifest m = load_manifest(dir / "m.csv");
    EXPECT_EQ(m.class_names, (std::vector<std::string>{"cat", "dog"}));
    ASSERT_EQ(m.entries.size(), 2u);
    EXPECT_EQ(m.entries[0].label_id, 1);
    EXPECT_EQ(m.entries[1].label_id, 0);
    EXPECT_EQ(m.entries[0].path, dir / "b.ppm");
}

TEST(Manifest, RetinopathyLabelOrder)
{
    const DatasetManifest m =
        counts_manifest({{"No DR", 2}, {"Severe", 2}, {"Mild", 2}, {"Proliferate", 2}, {"Moderate", 2}});
    EXPECT_EQ(m.class_names, (std::vector<std::string>{"Mild", "Moderate", "No DR", "Proliferate", "Severe"}));
    EXPECT_EQ(m.class_counts(), (std::vector<std::size_t>{2, 2, 2, 2, 2}));
}

TEST(Manifest, Errors)
{
    testing::TempDir dir("manifest_err");
    EXPECT_THROW(load_manifest(dir / "absent.csv"), ManifestError);
    testing::write_file(dir / "dup.csv", "path,label\na.ppm,x\na.ppm,y\n");
    EXPECT_THROW(load_manifest(dir / "dup.csv"), ManifestError);
    testing::write_file(dir / "empty_label.csv", "path,label\na.ppm,\n");
    EXPECT_THROW(load_manifest(dir / "empty_label.csv"), ManifestError);
    testing::write_file(dir / "header.csv", "file,class\na.ppm,x\n");
    EXPECT_THROW(load_manifest(dir / "header.csv"), ManifestError);
    testing::write_file(dir / "noentries.csv", "path,label\n");
    EXPECT_THROW(load_manifest(dir / "noentries.csv"), ManifestError);
    testing::write_file(dir / "commas.csv", "path,label\na,b.ppm,x\n");
    EXPECT_THROW(load_manifest(dir / "commas.csv"), ManifestError);
}

TEST(Manifest, WriteThenLoad)
{
    testing::TempDir dir("manifest_rt");
    const DatasetManifest m = counts_manifest({{"a", 3}, {"b", 2}});
    write_manifest(m, dir / "m.csv");
    const DatasetManifest back = load_manifest(dir / "m.csv");
    EXPECT_EQ(back.class_names, m.class_names);
    ASSERT_EQ(back.entries.size(), m.entries.size());
    for (std::size_t i = 0; i < m.entries.size(); ++i) {
        EXPECT_EQ(back.entries[i].path, dir / m.entries[i].path);
        EXPECT_EQ(back.entries[i].label_id, m.entries[i].label_id);
    }
}

TEST(Split, TwoOfEachFromTen)
{
    const DatasetManifest m = counts_manifest({{"a", 10}, {"b", 10}});
    const Split s = stratified_split(m, SplitSpec{});
    ASSERT_EQ(s.test.size(), 4u);
    std::size_t a = 0;
    for (auto i : s.test) {
        a += m.entries[i].label_id == 0 ? 1 : 0;
    }
    EXPECT_EQ(a, 2u);
}

TEST(Split, RetinopathyCountsGive1207)
{
    const DatasetManifest m = counts_manifest(
        {{"Mild", 1624}, {"Moderate", 999}, {"No DR", 1805}, {"Proliferate", 772}, {"Severe", 834}});
    EXPECT_EQ(m.entries.size(), 6034u);
    const Split s = stratified_split(m, SplitSpec{0.2, true, 3});
    EXPECT_EQ(s.test.size(), 1207u);
    EXPECT_EQ(s.train.size(), 6034u - 1207u);
}

TEST(Split, DeterministicDisjointExhaustive)
{
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<std::pair<std::string, std::size_t>> counts;
        const std::size_t k = 2 + rng.below(5);
        for (std::size_t c = 0; c < k; ++c) {
            counts.emplace_back("c" + std::to_string(c), 2 + rng.below(40));
        }
        const DatasetManifest m = counts_manifest(counts);
        const SplitSpec spec{0.2, true, rng.next()};
        const Split s = stratified_split(m, spec);
        const Split again = stratified_split(m, spec);
        EXPECT_EQ(s.test, again.test);
        EXPECT_EQ(s.train, again.train);

        std::vector<std::size_t> all = s.train;
        all.insert(all.end(), s.test.begin(), s.test.end());
        std::sort(all.begin(), all.end());
        EXPECT_EQ(all, iota(m.entries.size()));

        std::vector<std::size_t> per_class(k, 0);
        for (auto i : s.test) {
            ++per_class[static_cast<std::size_t>(m.entries[i].label_id)];
        }
        const auto n = m.class_counts();
        for (std::size_t c = 0; c < k; ++c) {
            const auto expected = std::clamp<std::size_t>(
                static_cast<std::size_t>(std::llround(0.2 * static_cast<double>(n[c]))), 1, n[c] - 1);
            EXPECT_EQ(per_class[c], expected);
            if (n[c] >= 3) {
                EXPECT_LE(std::abs(static_cast<double>(per_class[c]) / static_cast<double>(n[c]) - 0.2),
                          0.5 / static_cast<double>(n[c]) + 1e-12);
            }
        }
    }
}

TEST(Split, SeedChangesTheSelection)
{
    const DatasetManifest m = counts_manifest({{"a", 50}, {"b", 50}});
    EXPECT_NE(stratified_split(m, SplitSpec{0.2, true, 1}).test, stratified_split(m, SplitSpec{0.2, true, 2}).test);
}

TEST(Split, Errors)
{
    EXPECT_THROW(stratified_split(counts_manifest({{"a", 1}, {"b", 5}}), SplitSpec{}), SplitError);
    EXPECT_THROW(stratified_split(counts_manifest({{"a", 5}, {"b", 5}}), SplitSpec{0.0, true, 0}), SplitError);
    EXPECT_THROW(stratified_split(counts_manifest({{"a", 5}, {"b", 5}}), SplitSpec{1.0, true, 0}), SplitError);
}

TEST(Batches, PartitionArithmetic)
{
    const auto idx = iota(33);
    const auto batches = batch_iterator(idx, 16, 0, 1);
    ASSERT_EQ(batches.size(), 3u);
    EXPECT_EQ(batches[0].size(), 16u);
    EXPECT_EQ(batches[1].size(), 16u);
    EXPECT_EQ(batches[2].size(), 1u);
    std::vector<std::size_t> all;
    for (const auto& b : batches) {
        all.insert(all.end(), b.begin(), b.end());
    }
    std::sort(all.begin(), all.end());
    EXPECT_EQ(all, idx);
}

TEST(Batches, SeedAndEpochDetermineOrder)
{
    const auto idx = iota(20);
    EXPECT_EQ(batch_iterator(idx, 4, 7, 1), batch_iterator(idx, 4, 7, 1));
    EXPECT_NE(batch_iterator(idx, 4, 7, 1), batch_iterator(idx, 4, 7, 2));
    EXPECT_NE(batch_iterator(idx, 4, 7, 1), batch_iterator(idx, 4, 8, 1));
    EXPECT_THROW(batch_iterator(idx, 0, 7, 1), ValueError);
}

TEST(Samples, LoadDecodesAndNormalizes)
{
    testing::TempDir dir("samples");
    RawImage red{2, 2, {}};
    RawImage gray{3, 3, {}};
    for (int i = 0; i < 4; ++i) {
        red.rgb.insert(red.rgb.end(), {255, 0, 0});
    }
    for (int i = 0; i < 9; ++i) {
        gray.rgb.insert(gray.rgb.end(), {51, 51, 51});
    }
    testing::write_file(dir / "r.ppm", encode_ppm(red));
    testing::write_file(dir / "g.pgm", encode_pgm(gray));
    testing::write_file(dir / "m.csv", "path,label\nr.ppm,red\ng.pgm,gray\n");
    const SampleSet s = load_samples(load_manifest(dir / "m.csv"), 4, 4);
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s.labels, (std::vector<int>{1, 0}));
    EXPECT_EQ(s.pixels[0].shape(), (Shape4{1, 4, 4, 3}));
    EXPECT_EQ(s.pixels[0].at(0, 3, 3, 0), 1.0);
    EXPECT_EQ(s.pixels[1].at(0, 1, 2, 2), 0.2);

    const std::vector<std::size_t> pick{1, 0, 1};
    EXPECT_EQ(s.batch(pick).shape(), (Shape4{3, 4, 4, 3}));
    EXPECT_EQ(s.batch_labels(pick), (std::vector<int>{0, 1, 0}));
    EXPECT_EQ(s.subset(pick).labels, (std::vector<int>{0, 1, 0}));
}

} // namespace
} // namespace fabnet

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

#include <cstring>
#include <string>

#include <gtest/gtest.h>

#include "fabnet/checkpoint.hpp"
#include "fabnet/errors.hpp"
#include "fabnet/rng.hpp"
#include "test_support.hpp"

namespace fabnet {
namespace {

ModelConfig small_config()
{
    ModelConfig c;
    c.input_height = 8;
    c.input_width = 8;
    c.blocks = {{4, true}, {8, false}};
    c.fab_ratio = 4;
    c.head_hidden = 5;
    c.num_classes = 3;
    return c;
}

Model randomized(const ModelConfig& c, std::uint64_t seed)
{
    Model m = build_model(c, seed, {"alpha", "beta", "gamma delta"});
    Rng rng(seed);
    for (auto& p : m.parameters()) {
        p.value = testing::random_tensor(p.value.shape(), rng, -3, 3);
    }
    return m;
}

void expect_same(const Model& a, const Model& b)
{
    EXPECT_EQ(a.config(), b.config());
    EXPECT_EQ(a.class_names(), b.class_names());
    ASSERT_EQ(a.parameters().size(), b.parameters().size());
    for (std::size_t i = 0; i < a.parameters().size(); ++i) {
        const auto& p = a.parameters()[i];
        const auto& q = b.parameters()[i];
        EXPECT_EQ(p.name, q.name);
        EXPECT_EQ(p.trainable, q.trainable);
        ASSERT_EQ(p.value.shape(), q.value.shape());
        EXPECT_EQ(std::memcmp(p.value.data(), q.value.data(), p.value.size() * sizeof(double)), 0) << p.name;
    }
}

TEST(Checkpoint, RoundTripIsBitExact)
{
    const Model m = randomized(small_config(), 1);
    const std::string bytes = serialize_checkpoint(m);
    const Model back = deserialize_checkpoint(bytes);
    expect_same(m, back);
    EXPECT_EQ(serialize_checkpoint(back), bytes);
}

TEST(Checkpoint, FileRoundTrip)
{
    testing::TempDir dir("ckpt");
    ModelConfig c = small_config();
    c.freeze_backbone = true;
    c.use_fab = false;
    const Model m = randomized(c, 2);
    save_checkpoint(m, dir / "m.fabn");
    const Model back = load_checkpoint(dir / "m.fabn");
    expect_same(m, back);
    EXPECT_FALSE(back.config().use_fab);
    EXPECT_FALSE(back.attention_params().has_value());
}

TEST(Checkpoint, AttentionIsRestoredAndUsed)
{
    const Model m = randomized(small_config(), 3);
    const Model back = deserialize_checkpoint(serialize_checkpoint(m));
    ASSERT_TRUE(back.attention_params().has_value());
    EXPECT_EQ(back.attention_params()->excite_weight, m.attention_params()->excite_weight);
    Rng rng(3);
    const Tensor x = testing::random_tensor(Shape4{2, 8, 8, 3}, rng, 0, 1);
    EXPECT_EQ(back.logits(x), m.logits(x));
}

TEST(Checkpoint, HeaderLayout)
{
    const std::string bytes = serialize_checkpoint(build_model(small_config(), 0));
    ASSERT_GT(bytes.size(), 16u);
    EXPECT_EQ(bytes.substr(0, 4), "FABN");
    EXPECT_EQ(static_cast<unsigned char>(bytes[4]), kCheckpointVersion);
    EXPECT_EQ(bytes[5], 0);
    EXPECT_EQ(bytes[6], 0);
    EXPECT_EQ(bytes[7], 0);
}

TEST(Checkpoint, TruncationIsFormatError)
{
    const std::string bytes = serialize_checkpoint(build_model(small_config(), 0));
    for (std::size_t keep : {std::size_t{0}, std::size_t{3}, std::size_t{10}, bytes.size() / 2, bytes.size() - 1}) {
        EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, keep)), FormatError) << keep;
    }
}

TEST(Checkpoint, CorruptionIsFormatError)
{
    const std::string good = serialize_checkpoint(build_model(small_config(), 0));
    std::string bad_magic = good;
    bad_magic[0] = 'X';
    EXPECT_THROW(deserialize_checkpoint(bad_magic), FormatError);
    std::string bad_version = good;
    bad_version[4] = 9;
    EXPECT_THROW(deserialize_checkpoint(bad_version), FormatError);
    EXPECT_THROW(deserialize_checkpoint(good + "x"), FormatError);
}

TEST(Checkpoint, MissingFileIsIoError)
{
    testing::TempDir dir("ckpt_missing");
    EXPECT_THROW(load_checkpoint(dir / "absent.fabn"), IoError);
}

TEST(Checkpoint, TextBlockListsConfigAndClasses)
{
    const std::string text = checkpoint_text(build_model(small_config(), 0, {"a", "b", "c"}));
    EXPECT_NE(text.find("use_fab=true"), std::string::npos);
    EXPECT_NE(text.find("class=a\nclass=b\nclass=c\n"), std::string::npos);
}

TEST(CheckpointDiff, AttentionToggleIsConfined)
{
    ModelConfig c = small_config();
    const Model with = build_model(c, 5);
    c.use_fab = false;
    const Model without = build_model(c, 5);
    const CheckpointDiff d = diff_checkpoints(with, without);
    EXPECT_EQ(d.only_in_first.size(), 4u);
    EXPECT_TRUE(d.only_in_second.empty());
    EXPECT_TRUE(d.shape_changed.empty());
    EXPECT_EQ(d.config_keys, std::vector<std::string>{"use_fab"});
    EXPECT_TRUE(d.confined_to_attention());
}

TEST(CheckpointDiff, OtherChangesAreNotConfined)
{
    ModelConfig c = small_config();
    const Model base = build_model(c, 5);
    c.head_hidden = 7;
    const CheckpointDiff hidden = diff_checkpoints(base, build_model(c, 5));
    EXPECT_FALSE(hidden.shape_changed.empty());
    EXPECT_FALSE(hidden.confined_to_attention());

    const CheckpointDiff classes = diff_checkpoints(base, build_model(small_config(), 5, {"x", "y", "z"}));
    EXPECT_FALSE(classes.confined_to_attention());

    EXPECT_TRUE(diff_checkpoints(base, base).confined_to_attention());
    EXPECT_TRUE(diff_checkpoints(base, base).config_keys.empty());
}

} // namespace
} // namespace fabnet

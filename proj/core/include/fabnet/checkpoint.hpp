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
#include <vector>

#include "fabnet/model.hpp"

// Checkpoint layout, all integers little-endian:
//
//   "FABN"                      4 bytes magic
//   version                     u32 (kCheckpointVersion)
//   text length                 u64
//   text                        key=value lines: model config, then one
//                               "class=<name>" line per class in id order
//   parameter count             u64
//   per parameter:
//     name length               u32
//     name                      bytes
//     shape                     4 x u64 (batch, height, width, channels)
//     values                    IEEE-754 binary64, row-major
//
// Trainable flags are not stored; loading derives them from freeze_backbone.

namespace fabnet {

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const Model& model);

/// Throws FormatError on bad magic, unknown version, truncation, or a
/// parameter table that does not match the stored configuration.
Model deserialize_checkpoint(std::string_view bytes);

/// The key=value text block for a model (config + class lines).
std::string checkpoint_text(const Model& model);

/// Throws IoError if the file cannot be written.
void save_checkpoint(const Model& model, const std::filesystem::path& path);

/// Throws IoError if the file cannot be read, FormatError if it is malformed.
Model load_checkpoint(const std::filesystem::path& path);

/// Structural differences between two checkpoints. Parameter values are
/// not compared.
struct CheckpointDiff {
    std::vector<std::string> only_in_first;   ///< parameter names
    std::vector<std::string> only_in_second;  ///< parameter names
    std::vector<std::string> shape_changed;   ///< parameter names
    std::vector<std::string> config_keys;     ///< text keys whose lines differ

    /// True when every difference is an attention.* parameter or the
    /// use_fab key.
    bool confined_to_attention() const;
};

CheckpointDiff diff_checkpoints(const Model& first, const Model& second);

} // namespace fabnet

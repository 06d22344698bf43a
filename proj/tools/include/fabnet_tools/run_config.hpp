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

#include <filesystem>
#include <string>
#include <string_view>

#include "fabnet/model.hpp"
#include "fabnet/train.hpp"

namespace fabnet::tools {

/// Model and training settings assembled from defaults, a config file and
/// command-line overrides, applied in that order.
struct RunConfig {
    ModelConfig model;
    TrainConfig train;
};

/// Applies one `key=value` setting. Keys: learning_rate, batch_size,
/// max_epochs, image_size, fab_ratio, use_fab, freeze_backbone, head_hidden,
/// blocks, seed. ConfigError on an unknown key or unparsable value.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Applies a `key=value` assignment string.
void apply_assignment(RunConfig& config, std::string_view assignment);

/// Parses flat `key=value` text; blank lines and `#` comments are skipped.
/// Errors carry `origin:line`.
void apply_config_text(RunConfig& config, std::string_view text, std::string_view origin = "<config>");

/// Reads and applies a config file (IoError if unreadable).
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

/// Every key in a form apply_config_text accepts.
std::string format_run_config(const RunConfig& config);

} // namespace fabnet::tools

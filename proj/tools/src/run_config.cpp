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

#include "fabnet_tools/run_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include <fmt/format.h>

#include "fabnet/errors.hpp"

namespace fabnet::tools {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value)
{
    T out{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw ConfigError(fmt::format("{}: cannot parse '{}'", key, value));
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view value)
{
    if (value == "true" || value == "1") {
        return true;
    }
    if (value == "false" || value == "0") {
        return false;
    }
    throw ConfigError(fmt::format("{}: expected true/false, got '{}'", key, value));
}

} // namespace

void apply_setting(RunConfig& c, std::string_view key, std::string_view value)
{
    key = trim(key);
    value = trim(value);
    if (key == "learning_rate") {
        c.train.learning_rate = parse_number<double>(key, value);
    }
    else if (key == "batch_size") {
        c.train.batch_size = parse_number<std::size_t>(key, value);
    }
    else if (key == "max_epochs") {
        c.train.max_epochs = parse_number<std::size_t>(key, value);
    }
    else if (key == "seed") {
        c.train.seed = parse_number<std::uint64_t>(key, value);
    }
    else if (key == "image_size") {
        c.model.input_height = c.model.input_width = parse_number<std::size_t>(key, value);
    }
    else if (key == "fab_ratio") {
        c.model.fab_ratio = parse_number<std::size_t>(key, value);
    }
    else if (key == "use_fab") {
        c.model.use_fab = parse_bool(key, value);
    }
    else if (key == "freeze_backbone") {
        c.model.freeze_backbone = parse_bool(key, value);
    }
    else if (key == "head_hidden") {
        c.model.head_hidden = parse_number<std::size_t>(key, value);
    }
    else if (key == "blocks") {
        c.model.blocks = parse_blocks(value);
    }
    else {
        throw ConfigError(fmt::format("unknown config key '{}'", key));
    }
}

void apply_assignment(RunConfig& config, std::string_view assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw ConfigError(fmt::format("expected key=value, got '{}'", assignment));
    }
    apply_setting(config, assignment.substr(0, eq), assignment.substr(eq + 1));
}

void apply_config_text(RunConfig& config, std::string_view text, std::string_view origin)
{
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        try {
            apply_assignment(config, line);
        }
        catch (const ConfigError& e) {
            throw ConfigError(fmt::format("{}:{}: {}", origin, line_no, e.what()));
        }
    }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(fmt::format("cannot read config {}", path.string()));
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    apply_config_text(config, buffer.str(), path.string());
}

std::string format_run_config(const RunConfig& c)
{
    std::string out;
    out += fmt::format("learning_rate={}\n", c.train.learning_rate);
    out += fmt::format("batch_size={}\n", c.train.batch_size);
    out += fmt::format("max_epochs={}\n", c.train.max_epochs);
    out += fmt::format("seed={}\n", c.train.seed);
    out += fmt::format("image_size={}\n", c.model.input_height);
    out += fmt::format("fab_ratio={}\n", c.model.fab_ratio);
    out += fmt::format("use_fab={}\n", c.model.use_fab);
    out += fmt::format("freeze_backbone={}\n", c.model.freeze_backbone);
    out += fmt::format("head_hidden={}\n", c.model.head_hidden);
    out += fmt::format("blocks={}\n", format_blocks(c.model.blocks));
    return out;
}

} // namespace fabnet::tools

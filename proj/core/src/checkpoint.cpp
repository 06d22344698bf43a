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

#include "fabnet/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "fabnet/errors.hpp"

namespace fabnet {

namespace {

constexpr char kMagic[4] = {'F', 'A', 'B', 'N'};

template <typename T>
void put_le(std::string& out, T v)
{
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
}

class Reader {
public:
    explicit Reader(std::string_view bytes) : bytes_(bytes) {}

    std::string_view take(std::size_t n)
    {
        if (n > bytes_.size() - pos_) {
            throw FormatError(fmt::format("checkpoint truncated at byte {}", pos_));
        }
        const auto s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    template <typename T>
    T le()
    {
        const auto s = take(sizeof(T));
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            v |= static_cast<T>(static_cast<unsigned char>(s[i])) << (8 * i);
        }
        return v;
    }

    bool done() const noexcept { return pos_ == bytes_.size(); }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

std::size_t parse_count(const std::string& key, const std::string& value)
{
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw FormatError(fmt::format("checkpoint: bad value '{}' for {}", value, key));
    }
    return v;
}

bool parse_flag(const std::string& key, const std::string& value)
{
    if (value == "true") {
        return true;
    }
    if (value == "false") {
        return false;
    }
    throw FormatError(fmt::format("checkpoint: bad value '{}' for {}", value, key));
}

} // namespace

std::string checkpoint_text(const Model& model)
{
    const ModelConfig& c = model.config();
    std::string text;
    text += fmt::format("input_height={}\n", c.input_height);
    text += fmt::format("input_width={}\n", c.input_width);
    text += fmt::format("in_channels={}\n", c.in_channels);
    text += fmt::format("blocks={}\n", format_blocks(c.blocks));
    text += fmt::format("use_fab={}\n", c.use_fab);
    text += fmt::format("fab_ratio={}\n", c.fab_ratio);
    text += fmt::format("head_hidden={}\n", c.head_hidden);
    text += fmt::format("num_classes={}\n", c.num_classes);
    text += fmt::format("freeze_backbone={}\n", c.freeze_backbone);
    for (const auto& name : model.class_names()) {
        text += fmt::format("class={}\n", name);
    }
    return text;
}

std::string serialize_checkpoint(const Model& model)
{
    std::string out(kMagic, sizeof(kMagic));
    put_le<std::uint32_t>(out, kCheckpointVersion);
    const std::string text = checkpoint_text(model);
    put_le<std::uint64_t>(out, text.size());
    out += text;

    const auto params = model.parameters();
    put_le<std::uint64_t>(out, params.size());
    for (const auto& p : params) {
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.name.size()));
        out += p.name;
        const Shape4 s = p.value.shape();
        put_le<std::uint64_t>(out, s.batch);
        put_le<std::uint64_t>(out, s.height);
        put_le<std::uint64_t>(out, s.width);
        put_le<std::uint64_t>(out, s.channels);
        for (const double v : p.value.values()) {
            put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
        }
    }
    return out;
}

Model deserialize_checkpoint(std::string_view bytes)
{
    Reader in(bytes);
    if (in.take(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic))) {
        throw FormatError("not a checkpoint: bad magic");
    }
    const auto version = in.le<std::uint32_t>();
    if (version != kCheckpointVersion) {
        throw FormatError(fmt::format("unsupported checkpoint version {}", version));
    }

    const auto text_len = in.le<std::uint64_t>();
    std::istringstream text{std::string(in.take(text_len))};

    ModelConfig config;
    std::vector<std::string> class_names;
    std::map<std::string, std::string> fields;
    for (std::string line; std::getline(text, line);) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw FormatError(fmt::format("checkpoint: malformed config line '{}'", line));
        }
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        if (key == "class") {
            class_names.push_back(std::move(value));
        }
        else if (!fields.emplace(std::move(key), std::move(value)).second) {
            throw FormatError(fmt::format("checkpoint: duplicate key in '{}'", line));
        }
    }
    const auto require = [&](const char* key) -> const std::string& {
        const auto it = fields.find(key);
        if (it == fields.end()) {
            throw FormatError(fmt::format("checkpoint: missing config key {}", key));
        }
        return it->second;
    };
    config.input_height = parse_count("input_height", require("input_height"));
    config.input_width = parse_count("input_width", require("input_width"));
    config.in_channels = parse_count("in_channels", require("in_channels"));
    config.use_fab = parse_flag("use_fab", require("use_fab"));
    config.fab_ratio = parse_count("fab_ratio", require("fab_ratio"));
    config.head_hidden = parse_count("head_hidden", require("head_hidden"));
    config.num_classes = parse_count("num_classes", require("num_classes"));
    config.freeze_backbone = parse_flag("freeze_backbone", require("freeze_backbone"));
    if (fields.size() != 9) {
        throw FormatError("checkpoint: unknown config keys");
    }

    std::vector<std::pair<std::string, Shape4>> layout;
    try {
        config.blocks = parse_blocks(require("blocks"));
        layout = parameter_layout(config);
    }
    catch (const ConfigError& e) {
        throw FormatError(std::string("checkpoint: invalid config: ") + e.what());
    }

    const auto count = in.le<std::uint64_t>();
    if (count != layout.size()) {
        throw FormatError(fmt::format("checkpoint: {} parameters stored, config implies {}", count, layout.size()));
    }
    std::vector<Parameter> params;
    for (std::uint64_t i = 0; i < count; ++i) {
        Parameter p;
        const auto name_len = in.le<std::uint32_t>();
        p.name = std::string(in.take(name_len));
        Shape4 shape;
        shape.batch = in.le<std::uint64_t>();
        shape.height = in.le<std::uint64_t>();
        shape.width = in.le<std::uint64_t>();
        shape.channels = in.le<std::uint64_t>();
        if (p.name != layout[i].first || shape != layout[i].second) {
            throw FormatError(fmt::format("checkpoint: parameter {} is {} {}, expected {} {}", i, p.name, shape.str(),
                                          layout[i].first, layout[i].second.str()));
        }
        std::vector<double> values(shape.size());
        for (double& v : values) {
            v = std::bit_cast<double>(in.le<std::uint64_t>());
        }
        try {
            p.value = Tensor(shape, std::move(values));
        }
        catch (const ValueError&) {
            throw FormatError(fmt::format("checkpoint: non-finite value in {}", p.name));
        }
        params.push_back(std::move(p));
    }
    if (!in.done()) {
        throw FormatError("checkpoint: trailing bytes after parameter table");
    }

    try {
        return Model(config, std::move(class_names), std::move(params));
    }
    catch (const ConfigError& e) {
        throw FormatError(std::string("checkpoint: ") + e.what());
    }
}

void save_checkpoint(const Model& model, const std::filesystem::path& path)
{
    const std::string bytes = serialize_checkpoint(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError(fmt::format("cannot open {} for writing", path.string()));
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IoError(fmt::format("failed writing {}", path.string()));
    }
}

Model load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(fmt::format("cannot open {}", path.string()));
    }
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_checkpoint(bytes);
}

namespace {

std::map<std::string, std::vector<std::string>> text_entries(const Model& model)
{
    std::map<std::string, std::vector<std::string>> entries;
    std::istringstream in(checkpoint_text(model));
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        entries[line.substr(0, eq)].push_back(eq == std::string::npos ? std::string() : line.substr(eq + 1));
    }
    return entries;
}

} // namespace

bool CheckpointDiff::confined_to_attention() const
{
    const auto attention = [](const std::string& name) { return name.starts_with("attention."); };
    return std::all_of(only_in_first.begin(), only_in_first.end(), attention) &&
           std::all_of(only_in_second.begin(), only_in_second.end(), attention) && shape_changed.empty() &&
           std::all_of(config_keys.begin(), config_keys.end(), [](const std::string& k) { return k == "use_fab"; });
}

CheckpointDiff diff_checkpoints(const Model& first, const Model& second)
{
    CheckpointDiff diff;
    for (const auto& p : first.parameters()) {
        const Parameter* other = second.find(p.name);
        if (other == nullptr) {
            diff.only_in_first.push_back(p.name);
        }
        else if (other->value.shape() != p.value.shape()) {
            diff.shape_changed.push_back(p.name);
        }
    }
    for (const auto& p : second.parameters()) {
        if (first.find(p.name) == nullptr) {
            diff.only_in_second.push_back(p.name);
        }
    }

    const auto a = text_entries(first);
    const auto b = text_entries(second);
    std::set<std::string> keys;
    for (const auto& [k, v] : a) {
        keys.insert(k);
    }
    for (const auto& [k, v] : b) {
        keys.insert(k);
    }
    for (const auto& k : keys) {
        const auto ia = a.find(k);
        const auto ib = b.find(k);
        if (ia == a.end() || ib == b.end() || ia->second != ib->second) {
            diff.config_keys.push_back(k);
        }
    }
    return diff;
}

} // namespace fabnet

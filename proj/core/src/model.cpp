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

#include "fabnet/model.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include <fmt/format.h>

#include "fabnet/errors.hpp"
#include "fabnet/init.hpp"
#include "fabnet/ops.hpp"

namespace fabnet {

namespace {

constexpr std::uint64_t kAttentionStream = 0xfab;

std::string conv_name(std::size_t i, std::string_view what)
{
    return fmt::format("backbone.conv{}.{}", i + 1, what);
}

const char* const kAttentionNames[] = {"attention.W1", "attention.b1", "attention.W2", "attention.b2"};
const char* const kHeadNames[] = {"head.hidden.weight", "head.hidden.bias", "head.out.weight", "head.out.bias"};

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
        s.remove_suffix(1);
    }
    return s;
}

} // namespace

void ModelConfig::validate() const
{
    if (input_height == 0 || input_width == 0) {
        throw ConfigError("input size must be at least 1x1");
    }
    if (in_channels == 0) {
        throw ConfigError("in_channels must be at least 1");
    }
    if (blocks.empty()) {
        throw ConfigError("the backbone needs at least one conv block");
    }
    if (num_classes < 2) {
        throw ConfigError(fmt::format("num_classes must be at least 2, got {}", num_classes));
    }
    if (head_hidden == 0) {
        throw ConfigError("head_hidden must be at least 1");
    }
    std::size_t h = input_height;
    std::size_t w = input_width;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (blocks[i].out_channels == 0) {
            throw ConfigError(fmt::format("block {} has zero output channels", i + 1));
        }
        if (!blocks[i].pool) {
            continue;
        }
        if (h < 2 || w < 2) {
            throw ConfigError(fmt::format("block {} pools a {}x{} feature map below 1x1", i + 1, h, w));
        }
        if (h % 2 != 0 || w % 2 != 0) {
            throw ConfigError(fmt::format("block {} pools an odd {}x{} feature map", i + 1, h, w));
        }
        h /= 2;
        w /= 2;
    }
    if (use_fab) {
        const std::size_t C = blocks.back().out_channels;
        if (fab_ratio == 0 || C % fab_ratio != 0) {
            throw ConfigError(fmt::format("fab_ratio {} does not divide {} feature channels", fab_ratio, C));
        }
    }
}

Shape4 ModelConfig::feature_shape() const
{
    validate();
    std::size_t h = input_height;
    std::size_t w = input_width;
    for (const auto& b : blocks) {
        if (b.pool) {
            h /= 2;
            w /= 2;
        }
    }
    return Shape4{1, h, w, blocks.back().out_channels};
}

std::vector<ConvBlockSpec> parse_blocks(std::string_view text)
{
    std::vector<ConvBlockSpec> blocks;
    while (!text.empty()) {
        const auto comma = text.find(',');
        std::string_view item = trim(text.substr(0, comma));
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);

        ConvBlockSpec spec{0, false};
        const auto colon = item.find(':');
        std::string_view count = trim(item.substr(0, colon));
        if (colon != std::string_view::npos) {
            if (trim(item.substr(colon + 1)) != "pool") {
                throw ConfigError(fmt::format("bad block '{}': expected channels[:pool]", item));
            }
            spec.pool = true;
        }
        const auto [ptr, ec] = std::from_chars(count.data(), count.data() + count.size(), spec.out_channels);
        if (ec != std::errc{} || ptr != count.data() + count.size() || spec.out_channels == 0) {
            throw ConfigError(fmt::format("bad block '{}': expected channels[:pool]", item));
        }
        blocks.push_back(spec);
    }
    if (blocks.empty()) {
        throw ConfigError("empty block list");
    }
    return blocks;
}

std::string format_blocks(const std::vector<ConvBlockSpec>& blocks)
{
    std::string out;
    for (const auto& b : blocks) {
        if (!out.empty()) {
            out += ',';
        }
        out += std::to_string(b.out_channels);
        if (b.pool) {
            out += ":pool";
        }
    }
    return out;
}

std::vector<std::pair<std::string, Shape4>> parameter_layout(const ModelConfig& config)
{
    config.validate();
    std::vector<std::pair<std::string, Shape4>> layout;
    std::size_t cin = config.in_channels;
    for (std::size_t i = 0; i < config.blocks.size(); ++i) {
        const std::size_t cout = config.blocks[i].out_channels;
        layout.emplace_back(conv_name(i, "weight"), Shape4{cout, kConvKernel, kConvKernel, cin});
        layout.emplace_back(conv_name(i, "bias"), Shape4{1, 1, 1, cout});
        cin = cout;
    }
    if (config.use_fab) {
        const std::size_t r = cin / config.fab_ratio;
        layout.emplace_back(kAttentionNames[0], Shape4{1, 1, r, cin});
        layout.emplace_back(kAttentionNames[1], Shape4{1, 1, 1, r});
        layout.emplace_back(kAttentionNames[2], Shape4{1, 1, cin, r});
        layout.emplace_back(kAttentionNames[3], Shape4{1, 1, 1, cin});
    }
    layout.emplace_back(kHeadNames[0], Shape4{1, 1, config.head_hidden, cin});
    layout.emplace_back(kHeadNames[1], Shape4{1, 1, 1, config.head_hidden});
    layout.emplace_back(kHeadNames[2], Shape4{1, 1, config.num_classes, config.head_hidden});
    layout.emplace_back(kHeadNames[3], Shape4{1, 1, 1, config.num_classes});
    return layout;
}

Model::Model(ModelConfig config, std::vector<std::string> class_names, std::vector<Parameter> params)
    : config_(std::move(config))
    , class_names_(std::move(class_names))
    , params_(std::move(params))
{
    const auto layout = parameter_layout(config_);
    if (class_names_.size() != config_.num_classes) {
        throw ConfigError(
            fmt::format("{} class names given for a {}-class model", class_names_.size(), config_.num_classes));
    }
    if (std::set<std::string>(class_names_.begin(), class_names_.end()).size() != class_names_.size()) {
        throw ConfigError("class names must be unique");
    }
    if (layout.size() != params_.size()) {
        throw ConfigError(fmt::format("expected {} parameters, got {}", layout.size(), params_.size()));
    }
    for (std::size_t i = 0; i < layout.size(); ++i) {
        if (params_[i].name != layout[i].first || params_[i].value.shape() != layout[i].second) {
            throw ConfigError(fmt::format("parameter {} is {} {}, expected {} {}", i, params_[i].name,
                                          params_[i].value.shape().str(), layout[i].first, layout[i].second.str()));
        }
    }
    for (auto& p : params_) {
        if (p.name.starts_with("backbone.")) {
            p.group = ParamGroup::backbone;
        }
        else if (p.name.starts_with("attention.")) {
            p.group = ParamGroup::attention;
        }
        else {
            p.group = ParamGroup::head;
        }
        if (config_.freeze_backbone && p.group == ParamGroup::backbone) {
            p.trainable = false;
        }
    }
}

const Parameter* Model::find(std::string_view name) const noexcept
{
    const auto it = std::find_if(params_.begin(), params_.end(), [&](const Parameter& p) { return p.name == name; });
    return it == params_.end() ? nullptr : &*it;
}

Parameter* Model::find(std::string_view name) noexcept
{
    const auto it = std::find_if(params_.begin(), params_.end(), [&](const Parameter& p) { return p.name == name; });
    return it == params_.end() ? nullptr : &*it;
}

std::size_t Model::index_of(std::string_view name) const
{
    const Parameter* p = find(name);
    if (p == nullptr) {
        throw ConfigError(fmt::format("no parameter named '{}'", name));
    }
    return static_cast<std::size_t>(p - params_.data());
}

std::vector<std::string> Model::trainable_parameters() const
{
    std::vector<std::string> names;
    for (const auto& p : params_) {
        if (p.trainable) {
            names.push_back(p.name);
        }
    }
    return names;
}

void Model::set_trainable(std::string_view name, bool trainable)
{
    params_[index_of(name)].trainable = trainable;
}

void Model::freeze_all()
{
    for (auto& p : params_) {
        p.trainable = false;
    }
}

std::optional<FabParams> Model::attention_params() const
{
    if (!config_.use_fab) {
        return std::nullopt;
    }
    FabParams p;
    p.ratio = config_.fab_ratio;
    p.squeeze_weight = params_[index_of(kAttentionNames[0])].value;
    p.squeeze_bias = params_[index_of(kAttentionNames[1])].value;
    p.excite_weight = params_[index_of(kAttentionNames[2])].value;
    p.excite_bias = params_[index_of(kAttentionNames[3])].value;
    return p;
}

ModelOutput Model::forward(Tape& tape, const Var& x) const
{
    const Shape4 xs = x.shape();
    if (xs.height != config_.input_height || xs.width != config_.input_width || xs.channels != config_.in_channels) {
        throw ShapeError(fmt::format("model expects (N,{},{},{}) input, got {}", config_.input_height,
                                     config_.input_width, config_.in_channels, xs.str()));
    }

    std::vector<Var> leaves;
    leaves.reserve(params_.size());
    for (const auto& p : params_) {
        leaves.push_back(tape.leaf(p.value, p.trainable));
    }
    return forward(x, std::move(leaves));
}

ModelOutput Model::forward(const Var& x, std::vector<Var> params) const
{
    const Shape4 xs = x.shape();
    if (xs.height != config_.input_height || xs.width != config_.input_width || xs.channels != config_.in_channels) {
        throw ShapeError(fmt::format("model expects (N,{},{},{}) input, got {}", config_.input_height,
                                     config_.input_width, config_.in_channels, xs.str()));
    }
    if (params.size() != params_.size()) {
        throw ShapeError(fmt::format("model has {} parameters, {} bound", params_.size(), params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].shape() != params_[i].value.shape()) {
            throw ShapeError(fmt::format("{} bound with shape {}, expected {}", params_[i].name,
                                         params[i].shape().str(), params_[i].value.shape().str()));
        }
    }

    ModelOutput out;
    out.params = std::move(params);

    std::size_t k = 0;
    Var h = x;
    for (const auto& block : config_.blocks) {
        h = ops::relu(ops::conv2d(h, out.params[k], out.params[k + 1]));
        if (block.pool) {
            h = ops::maxpool2x2(h);
        }
        k += 2;
    }
    if (config_.use_fab) {
        const FabVars fab{out.params[k], out.params[k + 1], out.params[k + 2], out.params[k + 3]};
        out.attention = fab_forward(h, fab);
        h = out.attention->out;
        k += 4;
    }
    out.features = h;
    Var z = ops::mean_spatial(h);
    z = ops::relu(ops::dense(z, out.params[k], out.params[k + 1]));
    out.logits = ops::dense(z, out.params[k + 2], out.params[k + 3]);
    return out;
}

Tensor Model::logits(const Tensor& x) const
{
    Tape tape;
    const Var input = tape.constant(x);
    return forward(tape, input).logits.value();
}

Model build_model(const ModelConfig& config, std::uint64_t seed, std::vector<std::string> class_names)
{
    config.validate();
    if (class_names.empty()) {
        for (std::size_t i = 0; i < config.num_classes; ++i) {
            class_names.push_back(fmt::format("class_{}", i));
        }
    }

    Rng rng(seed);
    Rng attention_rng = rng.derive(kAttentionStream);
    std::vector<Parameter> params;
    std::size_t cin = config.in_channels;
    for (std::size_t i = 0; i < config.blocks.size(); ++i) {
        const std::size_t cout = config.blocks[i].out_channels;
        params.push_back({conv_name(i, "weight"), ParamGroup::backbone,
                          he_uniform(Shape4{cout, kConvKernel, kConvKernel, cin}, kConvKernel * kConvKernel * cin, rng)});
        params.push_back({conv_name(i, "bias"), ParamGroup::backbone, Tensor(Shape4{1, 1, 1, cout})});
        cin = cout;
    }
    if (config.use_fab) {
        FabParams fab = fab_init(cin, config.fab_ratio, attention_rng);
        params.push_back({kAttentionNames[0], ParamGroup::attention, std::move(fab.squeeze_weight)});
        params.push_back({kAttentionNames[1], ParamGroup::attention, std::move(fab.squeeze_bias)});
        params.push_back({kAttentionNames[2], ParamGroup::attention, std::move(fab.excite_weight)});
        params.push_back({kAttentionNames[3], ParamGroup::attention, std::move(fab.excite_bias)});
    }
    params.push_back({kHeadNames[0], ParamGroup::head, he_uniform(Shape4{1, 1, config.head_hidden, cin}, cin, rng)});
    params.push_back({kHeadNames[1], ParamGroup::head, Tensor(Shape4{1, 1, 1, config.head_hidden})});
    params.push_back({kHeadNames[2], ParamGroup::head,
                      glorot_uniform(Shape4{1, 1, config.num_classes, config.head_hidden}, config.head_hidden,
                                     config.num_classes, rng)});
    params.push_back({kHeadNames[3], ParamGroup::head, Tensor(Shape4{1, 1, 1, config.num_classes})});

    return Model(config, std::move(class_names), std::move(params));
}

} // namespace fabnet

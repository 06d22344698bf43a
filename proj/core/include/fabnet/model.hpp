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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fabnet/attention.hpp"
#include "fabnet/tape.hpp"
#include "fabnet/tensor.hpp"

namespace fabnet {

/// One 3x3 same-padded convolution + ReLU, optionally followed by a 2x2 max pool.
struct ConvBlockSpec {
    std::size_t out_channels = 16;
    bool pool = true;

    friend bool operator==(const ConvBlockSpec&, const ConvBlockSpec&) = default;
};

inline constexpr std::size_t kConvKernel = 3;

struct ModelConfig {
    std::size_t input_height = 32;
    std::size_t input_width = 32;
    std::size_t in_channels = 3;
    std::vector<ConvBlockSpec> blocks{{16, true}, {32, true}, {64, true}};
    bool use_fab = true;
    std::size_t fab_ratio = 8;
    std::size_t head_hidden = 64;
    std::size_t num_classes = 5;
    bool freeze_backbone = false;

    /// Throws ConfigError for an unusable configuration, including pooling
    /// a feature map below 1x1 or onto an odd extent.
    void validate() const;

    /// Per-sample shape (1,H,W,C) of the backbone's last feature map.
    Shape4 feature_shape() const;

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// "16:pool,32:pool,64" <-> block list.
std::vector<ConvBlockSpec> parse_blocks(std::string_view text);
std::string format_blocks(const std::vector<ConvBlockSpec>& blocks);

enum class ParamGroup { backbone, attention, head };

struct Parameter {
    std::string name;
    ParamGroup group = ParamGroup::backbone;
    Tensor value;
    bool trainable = true;
};

/// Result of one forward pass. `params[i]` is the tape leaf of
/// `Model::parameters()[i]`; frozen parameters are recorded without grad.
struct ModelOutput {
    Var logits;
    Var features;
    std::optional<FabActivations> attention;
    std::vector<Var> params;
};

/// conv blocks -> optional attention block -> spatial mean ->
/// dense(head_hidden) + ReLU -> dense(num_classes).
class Model {
public:
    /// Validates names, shapes and the class list against `config`
    /// (ConfigError otherwise).
    Model(ModelConfig config, std::vector<std::string> class_names, std::vector<Parameter> params);

    const ModelConfig& config() const noexcept { return config_; }
    const std::vector<std::string>& class_names() const noexcept { return class_names_; }

    std::span<Parameter> parameters() noexcept { return params_; }
    std::span<const Parameter> parameters() const noexcept { return params_; }

    const Parameter* find(std::string_view name) const noexcept;
    Parameter* find(std::string_view name) noexcept;

    /// Names of the parameters an optimizer may update, in model order.
    std::vector<std::string> trainable_parameters() const;

    void set_trainable(std::string_view name, bool trainable);
    void freeze_all();

    /// Copy of the attention weights; nullopt when the block is disabled.
    std::optional<FabParams> attention_params() const;

    /// x must be (N, input_height, input_width, in_channels).
    ModelOutput forward(Tape& tape, const Var& x) const;

    /// Forward pass with caller-bound parameters, one Var per entry of
    /// parameters() and of the same shape (ShapeError otherwise).
    ModelOutput forward(const Var& x, std::vector<Var> params) const;

    /// Logits of a batch without keeping the tape.
    Tensor logits(const Tensor& x) const;

private:
    std::size_t index_of(std::string_view name) const;

    ModelConfig config_;
    std::vector<std::string> class_names_;
    std::vector<Parameter> params_;
};

/// He-uniform conv and hidden dense weights, Glorot-uniform output weights,
/// zero biases. The attention block draws from its own derived stream so
/// that toggling `use_fab` leaves every other initial weight unchanged.
/// Empty `class_names` become "class_0", "class_1", ...
Model build_model(const ModelConfig& config, std::uint64_t seed, std::vector<std::string> class_names = {});

/// Parameter names and shapes implied by a configuration, in model order.
std::vector<std::pair<std::string, Shape4>> parameter_layout(const ModelConfig& config);

} // namespace fabnet

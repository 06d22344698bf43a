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

#include <cstddef>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fabnet/tensor.hpp"

namespace fabnet {

using NodeId = std::size_t;

class Tape;

/// Handle to a tensor recorded on a tape.
class Var {
public:
    Var() = default;
    Var(Tape* tape, NodeId id) : tape_(tape), id_(id) {}

    NodeId id() const noexcept { return id_; }
    Tape& tape() const noexcept { return *tape_; }
    const Tensor& value() const;
    const Shape4& shape() const { return value().shape(); }
    bool valid() const noexcept { return tape_ != nullptr; }

private:
    Tape* tape_ = nullptr;
    NodeId id_ = 0;
};

/// Backward rule of a recorded op. `operand_grads[i]` is null when operand i
/// does not need a gradient; otherwise the rule must accumulate (+=) into it.
/// Two slots may alias when an op consumes the same node twice.
using BackwardRule =
    std::function<void(const Tape& tape, const Tensor& upstream, std::span<Tensor* const> operand_grads)>;

/// d(loss)/d(node) for every grad-requiring node reached by backward(),
/// intermediates included.
class GradientMap {
public:
    GradientMap() = default;
    explicit GradientMap(std::vector<std::optional<Tensor>> grads) : grads_(std::move(grads)) {}

    const Tensor* find(NodeId id) const noexcept;
    const Tensor* find(const Var& v) const noexcept { return find(v.id()); }

    /// Throws GraphError when `id` has no gradient.
    const Tensor& at(NodeId id) const;
    const Tensor& at(const Var& v) const { return at(v.id()); }

    bool contains(NodeId id) const noexcept { return find(id) != nullptr; }

    friend bool operator==(const GradientMap&, const GradientMap&) = default;

private:
    std::vector<std::optional<Tensor>> grads_;
};

/// Append-only record of one forward pass.
///
/// Node ids are handed out in creation order, so every operand id is smaller
/// than the id of its consumer and a reverse sweep over ids is a valid
/// topological order. Vars keep a pointer to the tape, which is therefore
/// neither copyable nor movable. References returned by value() stay valid
/// while the tape grows.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Registers an input. Only leaves with `requires_grad` get gradients.
    Var leaf(Tensor value, bool requires_grad = true);
    Var constant(Tensor value) { return leaf(std::move(value), false); }

    /// Records an op result. The node needs a gradient iff any operand does.
    Var record(Tensor value, std::vector<NodeId> operands, BackwardRule rule);

    const Tensor& value(NodeId id) const;
    const Tensor& value(const Var& v) const { return value(v.id()); }
    bool requires_grad(NodeId id) const;
    std::size_t size() const noexcept { return nodes_.size(); }

    /// Reverse sweep seeded with d(loss)/d(loss) = 1. `loss` must hold a
    /// single element. Every grad-requiring leaf created before `loss` gets an
    /// entry, zero-filled if the loss does not depend on it.
    GradientMap backward(const Var& loss) const;
    GradientMap backward(NodeId loss) const;

private:
    struct Node {
        Tensor value;
        std::vector<NodeId> operands;
        BackwardRule rule;
        bool requires_grad = false;
        bool is_leaf = false;
    };

    std::deque<Node> nodes_;
};

} // namespace fabnet

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

#include "fabnet/tape.hpp"

#include <fmt/format.h>

#include "fabnet/errors.hpp"

namespace fabnet {

const Tensor& Var::value() const
{
    if (tape_ == nullptr) {
        throw GraphError("use of an unbound Var");
    }
    return tape_->value(id_);
}

const Tensor* GradientMap::find(NodeId id) const noexcept
{
    if (id >= grads_.size() || !grads_[id]) {
        return nullptr;
    }
    return &*grads_[id];
}

const Tensor& GradientMap::at(NodeId id) const
{
    const Tensor* g = find(id);
    if (g == nullptr) {
        throw GraphError(fmt::format("no gradient recorded for node {}", id));
    }
    return *g;
}

Var Tape::leaf(Tensor value, bool requires_grad)
{
    nodes_.push_back(Node{std::move(value), {}, {}, requires_grad, true});
    return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<NodeId> operands, BackwardRule rule)
{
    bool needs_grad = false;
    for (const NodeId op : operands) {
        if (op >= nodes_.size()) {
            throw GraphError(fmt::format("operand {} is not on this tape", op));
        }
        needs_grad = needs_grad || nodes_[op].requires_grad;
    }
    nodes_.push_back(Node{std::move(value), std::move(operands), std::move(rule), needs_grad, false});
    return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::value(NodeId id) const
{
    if (id >= nodes_.size()) {
        throw GraphError(fmt::format("node {} is not on this tape", id));
    }
    return nodes_[id].value;
}

bool Tape::requires_grad(NodeId id) const
{
    if (id >= nodes_.size()) {
        throw GraphError(fmt::format("node {} is not on this tape", id));
    }
    return nodes_[id].requires_grad;
}

GradientMap Tape::backward(const Var& loss) const
{
    if (loss.valid() && &loss.tape() != this) {
        throw GraphError("loss belongs to a different tape");
    }
    return backward(loss.id());
}

GradientMap Tape::backward(NodeId loss) const
{
    if (loss >= nodes_.size()) {
        throw GraphError(fmt::format("loss node {} is not on this tape", loss));
    }
    if (nodes_[loss].value.size() != 1) {
        throw ShapeError("backward needs a scalar loss, got shape " + nodes_[loss].value.shape().str());
    }

    std::vector<std::optional<Tensor>> grads(loss + 1);
    grads[loss] = Tensor(nodes_[loss].value.shape(), 1.0);

    std::vector<Tensor*> slots;
    for (NodeId id = loss + 1; id-- > 0;) {
        const Node& node = nodes_[id];
        if (!grads[id] || node.is_leaf || !node.requires_grad) {
            continue;
        }
        slots.assign(node.operands.size(), nullptr);
        for (std::size_t i = 0; i < node.operands.size(); ++i) {
            const NodeId op = node.operands[i];
            if (!nodes_[op].requires_grad) {
                continue;
            }
            if (!grads[op]) {
                grads[op] = Tensor(nodes_[op].value.shape());
            }
            slots[i] = &*grads[op];
        }
        node.rule(*this, *grads[id], slots);
    }

    for (NodeId id = 0; id <= loss; ++id) {
        const Node& node = nodes_[id];
        if (node.is_leaf && node.requires_grad && !grads[id]) {
            grads[id] = Tensor(node.value.shape());
        }
    }
    return GradientMap(std::move(grads));
}

} // namespace fabnet

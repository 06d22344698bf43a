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

#include <gtest/gtest.h>

#include "fabnet/errors.hpp"
#include "fabnet/ops.hpp"
#include "fabnet/rng.hpp"
#include "fabnet/tape.hpp"
#include "test_support.hpp"

namespace fabnet {
namespace {

TEST(Tape, LeafLossHasUnitGradient)
{
    Tape tape;
    const Var x = tape.leaf(Tensor::scalar(3.0));
    const GradientMap g = tape.backward(x);
    EXPECT_EQ(g.at(x)[0], 1.0);
}

TEST(Tape, MeanSpatialDistributesQuarter)
{
    Tape tape;
    const Var x = tape.leaf(Tensor(Shape4{1, 2, 2, 1}, std::vector<double>{1, 2, 3, 4}));
    const Var loss = ops::mean_spatial(x);
    const GradientMap g = tape.backward(loss);
    for (double v : g.at(x).values()) {
        EXPECT_EQ(v, 0.25);
    }
}

TEST(Tape, SumOfSigmoidAtZero)
{
    Tape tape;
    const Var x = tape.leaf(Tensor(Shape4{1, 1, 1, 3}));
    const GradientMap g = tape.backward(ops::sum(ops::sigmoid(x)));
    for (double v : g.at(x).values()) {
        EXPECT_EQ(v, 0.25);
    }
}

TEST(Tape, NonScalarLossIsShapeError)
{
    Tape tape;
    const Var x = tape.leaf(Tensor(Shape4{1, 1, 1, 2}));
    EXPECT_THROW(tape.backward(x), ShapeError);
}

TEST(Tape, ForeignNodeIsGraphError)
{
    Tape a;
    Tape b;
    const Var x = a.leaf(Tensor::scalar(1.0));
    EXPECT_THROW(b.backward(x), GraphError);
    EXPECT_THROW(b.backward(NodeId{5}), GraphError);
}

TEST(Tape, MixingTapesInAnOpIsGraphError)
{
    Tape a;
    Tape b;
    const Var x = a.leaf(Tensor::scalar(1.0));
    const Var y = b.leaf(Tensor::scalar(2.0));
    EXPECT_THROW(ops::add(x, y), GraphError);
}

TEST(Tape, RecordRejectsUnknownOperand)
{
    Tape tape;
    tape.leaf(Tensor::scalar(1.0));
    EXPECT_THROW(tape.record(Tensor::scalar(0.0), {NodeId{3}}, {}), GraphError);
}

TEST(Tape, OperandIdsPrecedeConsumers)
{
    Tape tape;
    const Var a = tape.leaf(Tensor::scalar(1.0));
    const Var b = tape.leaf(Tensor::scalar(2.0));
    const Var c = ops::add(a, b);
    const Var d = ops::mul(c, a);
    EXPECT_LT(a.id(), c.id());
    EXPECT_LT(b.id(), c.id());
    EXPECT_LT(c.id(), d.id());
    EXPECT_EQ(tape.size(), 4u);
}

TEST(Tape, ConstantsGetNoGradient)
{
    Tape tape;
    const Var x = tape.leaf(Tensor::scalar(2.0));
    const Var k = tape.constant(Tensor::scalar(3.0));
    const GradientMap g = tape.backward(ops::mul(x, k));
    EXPECT_EQ(g.at(x)[0], 3.0);
    EXPECT_FALSE(g.contains(k.id()));
    EXPECT_THROW(g.at(k), GraphError);
}

TEST(Tape, UnreachedLeafGetsZeroGradient)
{
    Tape tape;
    const Var x = tape.leaf(Tensor::scalar(2.0));
    const Var unused = tape.leaf(Tensor(Shape4{1, 1, 1, 3}, 7.0));
    const GradientMap g = tape.backward(ops::sum(x));
    ASSERT_TRUE(g.contains(unused.id()));
    EXPECT_EQ(g.at(unused), Tensor(Shape4{1, 1, 1, 3}));
}

TEST(Tape, GradientsAccumulateOverFanOut)
{
    Tape tape;
    const Var x = tape.leaf(Tensor::scalar(3.0));
    const Var y = ops::mul(x, x);  // x^2
    const GradientMap g = tape.backward(ops::add(y, x));
    EXPECT_EQ(g.at(x)[0], 7.0);
}

TEST(Tape, GradientShapesMatchValues)
{
    Rng rng(1);
    Tape tape;
    const Var x = tape.leaf(testing::random_tensor(Shape4{2, 3, 3, 4}, rng));
    const Var w = tape.leaf(testing::random_tensor(Shape4{2, 1, 1, 4}, rng));
    const GradientMap g = tape.backward(ops::sum(ops::mul(x, w)));
    EXPECT_EQ(g.at(x).shape(), x.shape());
    EXPECT_EQ(g.at(w).shape(), w.shape());
}

TEST(Tape, BackwardIsDeterministic)
{
    Rng rng(9);
    Tape tape;
    const Var x = tape.leaf(testing::random_tensor(Shape4{2, 4, 4, 3}, rng));
    const Var k = tape.leaf(testing::random_tensor(Shape4{5, 3, 3, 3}, rng));
    const Var b = tape.leaf(testing::random_tensor(Shape4{1, 1, 1, 5}, rng));
    const Var loss = ops::sum(ops::maxpool2x2(ops::relu(ops::conv2d(x, k, b))));
    EXPECT_EQ(tape.backward(loss), tape.backward(loss));
}

} // namespace
} // namespace fabnet

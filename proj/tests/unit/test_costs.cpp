/*
 Copyright 2026 The DMPC Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/


#include <cmath>

#include <gtest/gtest.h>

#include "dmpc/costs.hpp"
#include "dmpc/dmpc.hpp"

namespace dmpc {
namespace {

CostWeights bicycle_weights() {
    return {Eigen::Vector4d(1.0, 1.0, 0.1, 0.1), Eigen::Vector2d(0.01, 0.01)};
}

TEST(Costs, KnownStageCost) {
    const CostWeights w = bicycle_weights();
    const Eigen::Vector4d xf(51.0, 10.0, 0.3, 1.1);
    EXPECT_EQ(known_stage_cost_h(xf, Eigen::Vector2d::Zero(), xf, w), 0.0);
    EXPECT_DOUBLE_EQ(known_stage_cost_h(xf + Eigen::Vector4d(1, 0, 0, 0), Eigen::Vector2d::Zero(), xf, w), 1.0);
    EXPECT_DOUBLE_EQ(known_stage_cost_h(xf + Eigen::Vector4d(0, 2, 0, 0), Eigen::Vector2d(1, 1), xf, w), 4.02);
}

TEST(Costs, TerminalRelativeStageCost) {
    const CostWeights w = bicycle_weights();
    const Eigen::Vector4d s(3.0, -1.0, 0.0, 2.0);
    EXPECT_EQ(terminal_relative_stage_cost_ell(s, Eigen::Vector2d::Zero(), s, w), 0.0);
    EXPECT_DOUBLE_EQ(terminal_relative_stage_cost_ell(s + Eigen::Vector4d(1, 0, 0, 0), Eigen::Vector2d::Zero(), s, w),
                     1.0);
    EXPECT_DOUBLE_EQ(terminal_relative_stage_cost_ell(s + Eigen::Vector4d(0, 0, 1, 0), Eigen::Vector2d::Zero(), s, w),
                     0.1);
}

TEST(Costs, StageCostDimensionMismatch) {
    const CostWeights w = bicycle_weights();
    EXPECT_THROW((void)known_stage_cost_h(Eigen::Vector3d::Zero(), Eigen::Vector2d::Zero(), Eigen::Vector4d::Zero(), w),
                 DimensionMismatch);
}

TEST(Costs, BarrierValues) {
    EXPECT_DOUBLE_EQ(barrier_transform(-1.0), 1.0);
    EXPECT_DOUBLE_EQ(barrier_transform(-2.0), 0.5);
    EXPECT_EQ(barrier_transform(0.0), kInfiniteCost);
    EXPECT_EQ(barrier_transform(3.0), kInfiniteCost);
}

TEST(Costs, BarrierIncreasingOnNegativeAxis) {
    double prev = 0.0;
    for (double y = -100.0; y < 0.0; y += 0.37) {
        const double b = barrier_transform(y);
        EXPECT_GT(b, 0.0);
        EXPECT_GT(b, prev);
        prev = b;
    }
    EXPECT_GT(barrier_transform(-1e-12), 1e11);
}

TEST(Costs, InfiniteSentinelLosesEveryComparison) {
    EXPECT_LT(1e300, barrier_transform(0.0));
    EXPECT_EQ(barrier_transform(0.0) + 5.0, kInfiniteCost);
}

TEST(Costs, OverallCost) {
    Trajectory empty;
    EXPECT_EQ(trajectory_overall_cost(empty), 0.0);

    Trajectory t;
    t.states.assign(3, State::Zero(1));
    t.inputs.assign(2, Input::Zero(1));
    t.stage_costs = {{1.0, 0.5}, {2.0, 0.5}};
    EXPECT_DOUBLE_EQ(trajectory_overall_cost(t), 4.0);

    t.stage_costs.pop_back();
    EXPECT_THROW((void)trajectory_overall_cost(t), std::invalid_argument);
}

TEST(Costs, OverallCostIsAdditive) {
    Trajectory a;
    a.states.assign(3, State::Zero(1));
    a.inputs.assign(2, Input::Zero(1));
    a.stage_costs = {{1.5, 0.25}, {0.75, 2.0}};
    Trajectory b;
    b.states.assign(2, State::Zero(1));
    b.inputs.assign(1, Input::Zero(1));
    b.stage_costs = {{3.0, 1.0}};
    Trajectory ab = a;
    ab.states.push_back(State::Zero(1));
    ab.inputs.push_back(Input::Zero(1));
    ab.stage_costs.push_back(b.stage_costs[0]);
    EXPECT_DOUBLE_EQ(trajectory_overall_cost(ab), trajectory_overall_cost(a) + trajectory_overall_cost(b));
}

TEST(Costs, CostToGoRecursion) {
    Trajectory t;
    t.states.assign(3, State::Zero(1));
    t.inputs.assign(2, Input::Zero(1));
    t.stage_costs = {{1.0, 0.5}, {2.0, 0.5}};
    const Trajectory q = compute_cost_to_go(t);
    ASSERT_EQ(q.cost_to_go.size(), 3u);
    EXPECT_EQ(q.cost_to_go[0], 4.0);
    EXPECT_EQ(q.cost_to_go[1], 2.5);
    EXPECT_EQ(q.cost_to_go[2], 0.0);
    for (int k = 0; k < q.steps(); ++k) {
        EXPECT_EQ(q.cost_to_go[k], q.stage_costs[k].h_val + q.stage_costs[k].z_val + q.cost_to_go[k + 1]);
    }
}

}  // namespace
}  // namespace dmpc

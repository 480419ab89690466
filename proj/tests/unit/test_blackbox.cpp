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
#include <vector>

#include <gtest/gtest.h>

#include "dmpc/blackbox.hpp"

namespace dmpc {
namespace {

std::vector<State> line_states(int n, double x0, double dx) {
    std::vector<State> s;
    for (int k = 0; k < n; ++k) s.push_back(Eigen::Vector4d(x0 + k * dx, 0.0, 0.0, 1.0));
    return s;
}

std::vector<Input> zero_inputs(int n) { return std::vector<Input>(n, Eigen::Vector2d::Zero()); }

TEST(Blackbox, ZeroAmplitudeGivesZeros) {
    GaussianBumpField f({{0.0, 0.0, 0.0, 2.0}, {3.0, 1.0, 0.0, 1.0}});
    const auto z = f.predict_segment(line_states(5, -1.0, 1.0), zero_inputs(4));
    ASSERT_EQ(z.size(), 4u);
    for (double v : z) EXPECT_EQ(v, 0.0);
}

TEST(Blackbox, PeakAtBumpCenter) {
    GaussianBumpField f({{2.0, 0.0, 5.0, 1.5}});
    const auto z = f.predict_segment(line_states(4, 0.0, 1.0), zero_inputs(3));
    EXPECT_DOUBLE_EQ(z[2], 5.0);
    EXPECT_NEAR(z[1], 5.0 * std::exp(-1.0 / (2 * 1.5 * 1.5)), 1e-14);
    EXPECT_DOUBLE_EQ(f.value_at(2.0, 0.0), 5.0);
}

TEST(Blackbox, TerminalStateNotCharged) {
    GaussianBumpField f({{3.0, 0.0, 7.0, 0.1}});
    const auto z = f.predict_segment(line_states(4, 0.0, 1.0), zero_inputs(3));
    for (double v : z) EXPECT_LT(v, 1e-15);
}

TEST(Blackbox, Baseline) {
    GaussianBumpField f({}, 0, 1, ExponentialBaseline{5.0, 0.0, -1.0 / 70.0});
    EXPECT_DOUBLE_EQ(f.value_at(10.0, 0.0), 5.0);
    EXPECT_NEAR(f.value_at(0.0, 70.0), 5.0 / std::exp(1.0), 1e-14);
}

TEST(Blackbox, InvalidBumpRejected) {
    EXPECT_THROW(GaussianBumpField({{0, 0, -1.0, 1.0}}), std::invalid_argument);
    EXPECT_THROW(GaussianBumpField({{0, 0, 1.0, 0.0}}), std::invalid_argument);
}

TEST(Blackbox, ForbiddenDiscIsInfinite) {
    RegionPenaltyField f({PenaltyRegion{Disc{2.0, 0.0, 0.75}, 0.0, true, 0.0}});
    const auto z = f.predict_segment(line_states(6, 0.0, 1.0), zero_inputs(5));
    EXPECT_EQ(z[0], 0.0);
    EXPECT_EQ(z[1], 0.0);
    EXPECT_EQ(z[2], kInfiniteCost);
    EXPECT_EQ(z[3], 0.0);
}

TEST(Blackbox, BarrierMarginOutsideDisc) {
    RegionPenaltyField f({PenaltyRegion{Disc{0.0, 0.0, 1.0}, 0.0, true, 1.0}});
    EXPECT_NEAR(f.value_at(1.5, 0.0), 2.0, 1e-12);
    EXPECT_EQ(f.value_at(2.5, 0.0), 0.0);
    EXPECT_EQ(f.value_at(0.5, 0.0), kInfiniteCost);
}

TEST(Blackbox, PolygonPenalty) {
    Polygon square{{Eigen::Vector2d(0, 0), Eigen::Vector2d(2, 0), Eigen::Vector2d(2, 2), Eigen::Vector2d(0, 2)}};
    RegionPenaltyField f({PenaltyRegion{square, 3.0, false, 0.0}});
    EXPECT_EQ(f.value_at(1.0, 1.0), 3.0);
    EXPECT_EQ(f.value_at(3.0, 1.0), 0.0);
    EXPECT_NEAR(signed_depth(square, 1.0, 0.5), 0.5, 1e-12);
    EXPECT_NEAR(signed_depth(square, 3.0, 1.0), -1.0, 1e-12);
}

TEST(Blackbox, LengthMismatchThrows) {
    ZeroPredictor p;
    EXPECT_THROW((void)p.predict_segment(line_states(3, 0, 1), zero_inputs(3)), DimensionMismatch);
    EXPECT_EQ(p.query_count(), 0u);
}

TEST(Blackbox, Counters) {
    GaussianBumpField f({{0.0, 0.0, 1.0, 1.0}});
    const auto s = line_states(13, 0.0, 0.5);
    const auto u = zero_inputs(12);
    (void)f.predict_segment(s, u);
    (void)f.predict_segment(s, u);
    EXPECT_EQ(f.query_count(), 2u);
    EXPECT_EQ(f.sample_count(), 24u);
    f.reset_counters();
    EXPECT_EQ(f.query_count(), 0u);
    f.reset_counters();
    EXPECT_EQ(f.sample_count(), 0u);
    (void)f.predict_segment(s, u);
    EXPECT_EQ(f.sample_count(), 12u);
}

TEST(Blackbox, Deterministic) {
    GaussianBumpField f({{1.0, 0.2, 4.0, 0.7}, {-1.0, 0.5, 2.0, 1.3}});
    const auto s = line_states(9, -2.0, 0.5);
    const auto u = zero_inputs(8);
    const auto a = f.predict_segment(s, u);
    (void)f.predict_segment(line_states(9, 5.0, 0.1), u);
    EXPECT_EQ(a, f.predict_segment(s, u));
}

}  // namespace
}  // namespace dmpc

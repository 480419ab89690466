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


#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "dmpc/dynamics.hpp"

namespace dmpc {
namespace {

// Fine forward-Euler integration of the kinematic bicycle, written out independently.
Eigen::Vector4d euler_bicycle(Eigen::Vector4d x, const Eigen::Vector2d& u, double lf, double lr, double T, int n) {
    const double h = T / n;
    const double beta = std::atan(lr / (lf + lr) * std::tan(u(0)));
    for (int i = 0; i < n; ++i) {
        const double v = x(3);
        Eigen::Vector4d d(v * std::cos(x(2) + beta), v * std::sin(x(2) + beta), v / lr * std::sin(beta), u(1));
        x += h * d;
    }
    return x;
}

TEST(Dynamics, DoubleIntegratorStep) {
    const SystemModel m = make_double_integrator(1, 0.5);
    const State x = Eigen::Vector2d(0.0, 0.0);
    const Input u = Eigen::VectorXd::Constant(1, 1.0);
    const State next = step(m, x, u);
    EXPECT_DOUBLE_EQ(next(0), 0.0);
    EXPECT_DOUBLE_EQ(next(1), 0.5);
}

TEST(Dynamics, DoubleIntegratorPlanarLayout) {
    const SystemModel m = make_double_integrator(2, 0.5);
    ASSERT_EQ(m.n, 4);
    ASSERT_EQ(m.m, 2);
    const State x = Eigen::Vector4d(1.0, 2.0, 3.0, -4.0);
    const State next = step(m, x, Eigen::Vector2d(2.0, 0.0));
    EXPECT_DOUBLE_EQ(next(0), 2.5);
    EXPECT_DOUBLE_EQ(next(1), 0.0);
    EXPECT_DOUBLE_EQ(next(2), 4.0);
    EXPECT_DOUBLE_EQ(next(3), -4.0);
}

TEST(Dynamics, BicycleStraightLine) {
    const SystemModel m = make_bicycle_model({}, 0.5);
    const State next = step(m, Eigen::Vector4d(0.0, 0.0, 0.0, 1.0), Eigen::Vector2d::Zero());
    EXPECT_NEAR(next(0), 0.5, 1e-12);
    EXPECT_NEAR(next(1), 0.0, 1e-12);
    EXPECT_NEAR(next(2), 0.0, 1e-12);
    EXPECT_NEAR(next(3), 1.0, 1e-12);
}

TEST(Dynamics, BicycleTurningMatchesFineEuler) {
    const BicycleParams p;
    const SystemModel m = make_bicycle_model(p, 0.5);
    const Eigen::Vector4d x(1.0, -2.0, 0.3, 2.0);
    const Eigen::Vector2d u(0.3, 0.5);
    const State rk4 = step(m, x, u);
    const Eigen::Vector4d ref = euler_bicycle(x, u, p.l_f, p.l_r, 0.5, 500000);
    EXPECT_LT((rk4 - ref).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Dynamics, SlipAngle) {
    const BicycleParams p;
    EXPECT_EQ(bicycle_slip_angle(0.0, p), 0.0);
    const double d = 0.3;
    EXPECT_NEAR(bicycle_slip_angle(-d, p), -bicycle_slip_angle(d, p), 1e-15);
    EXPECT_GT(bicycle_slip_angle(d, p), 0.0);
    EXPECT_LT(bicycle_slip_angle(d, p), d);
    EXPECT_LT(bicycle_slip_angle(0.2, p), bicycle_slip_angle(0.3, p));
}

TEST(Dynamics, JacobianMatchesFiniteDifferences) {
    const SystemModel m = make_bicycle_model({}, 0.5);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Vector4d x(5 * U(rng), 5 * U(rng), 3 * U(rng), 2.0 + 1.5 * U(rng));
        const Eigen::Vector2d u(0.4 * U(rng), U(rng));
        const StepJacobian J = step_jacobian(m, x, u);
        const double eps = 1e-6;
        for (int j = 0; j < 4; ++j) {
            Eigen::Vector4d e = Eigen::Vector4d::Zero();
            e(j) = eps;
            const Eigen::VectorXd col = (step(m, x + e, u) - step(m, x - e, u)) / (2 * eps);
            EXPECT_LT((J.A.col(j) - col).cwiseAbs().maxCoeff(), 1e-6);
        }
        for (int j = 0; j < 2; ++j) {
            Eigen::Vector2d e = Eigen::Vector2d::Zero();
            e(j) = eps;
            const Eigen::VectorXd col = (step(m, x, u + e) - step(m, x, u - e)) / (2 * eps);
            EXPECT_LT((J.B.col(j) - col).cwiseAbs().maxCoeff(), 1e-6);
        }
    }
}

TEST(Dynamics, LinearJacobianIsExact) {
    const SystemModel m = make_double_integrator(2, 0.25);
    const StepJacobian J = step_jacobian(m, Eigen::Vector4d::Ones(), Eigen::Vector2d::Ones());
    const auto& lin = std::get<LinearDynamics>(m.dynamics);
    EXPECT_TRUE(J.A.isApprox(lin.A));
    EXPECT_TRUE(J.B.isApprox(lin.B));
}

TEST(Dynamics, DimensionMismatchThrows) {
    const SystemModel m = make_double_integrator(1, 0.5);
    EXPECT_THROW((void)step(m, Eigen::Vector3d::Zero(), Eigen::VectorXd::Zero(1)), DimensionMismatch);
    EXPECT_THROW((void)step(m, Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()), DimensionMismatch);
}

TEST(Dynamics, EquilibriumWrapsHeading) {
    const SystemModel m = make_bicycle_model({}, 0.5);
    const Eigen::Vector4d w(1.0, 1.0, 0.1, 0.1);
    const Eigen::Vector4d xf(51.0, 10.0, std::numbers::pi / 10, 1.1);
    Eigen::Vector4d x = xf;
    x(2) += 2 * std::numbers::pi;
    EXPECT_TRUE(is_at_equilibrium(m, x, xf, w, 1e-9));
    x(0) += 0.2;
    EXPECT_FALSE(is_at_equilibrium(m, x, xf, w, 0.15));
    EXPECT_TRUE(is_at_equilibrium(m, x, xf, w, 0.25));
    EXPECT_THROW((void)is_at_equilibrium(m, x, xf, w, 0.0), std::invalid_argument);
}

TEST(Dynamics, WrapAngle) {
    EXPECT_NEAR(wrap_angle(3 * std::numbers::pi / 2), -std::numbers::pi / 2, 1e-12);
    EXPECT_NEAR(wrap_angle(-std::numbers::pi / 4), -std::numbers::pi / 4, 1e-15);
    EXPECT_NEAR(wrap_angle(4 * std::numbers::pi + 0.1), 0.1, 1e-12);
}

TEST(Dynamics, ReachBoundCoversRollout) {
    const SystemModel m = make_bicycle_model({}, 0.5);
    Eigen::Vector4d x(0.0, 0.0, 0.0, 1.0);
    const Eigen::Vector4d x0 = x;
    // full throttle until the speed limit, which admissible inputs may not exceed at the next sample
    for (int k = 0; k < 12; ++k) x = step(m, x, Eigen::Vector2d(0.0, std::min(1.0, (4.0 - x(3)) / m.dt)));
    EXPECT_NEAR(x(3), 4.0, 1e-12);
    EXPECT_LE(position_distance(m, x0, x), reach_distance_bound(m, x0, 12) + 1e-9);
    EXPECT_TRUE(std::isinf(reach_distance_bound(make_linear_model(Eigen::MatrixXd::Identity(1, 1),
                                                                  Eigen::MatrixXd::Identity(1, 1), 1.0),
                                                State::Zero(1), 3)));
}

}  // namespace
}  // namespace dmpc

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

#pragma once

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace dmpc {

using State = Eigen::VectorXd;
using Input = Eigen::VectorXd;

class DimensionMismatch : public std::invalid_argument {
public:
    explicit DimensionMismatch(const std::string& what) : std::invalid_argument(what) {}
};

/// Discrete linear map x+ = A x + B u.
struct LinearDynamics {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    int double_integrator_dims{0};  // > 0 when the model is [p, v] with u = acceleration
};

/// Kinematic bicycle geometry. State [x, y, psi, v], input [delta, a].
struct BicycleParams {
    double l_f{1.105};
    double l_r{1.738};
};

/// A discrete-time system with box constraints on states and inputs.
///
/// The bounds are not applied by `step`; they are enforced by the optimizer.
/// `angle_indices` lists state components that are headings (unwrapped internally,
/// compared modulo 2*pi by the equilibrium test).
struct SystemModel {
    int n{0};
    int m{0};
    double dt{0.0};
    Eigen::VectorXd x_lo;
    Eigen::VectorXd x_hi;
    Eigen::VectorXd u_lo;
    Eigen::VectorXd u_hi;
    Eigen::VectorXd u_eq;
    std::vector<int> angle_indices;
    std::variant<LinearDynamics, BicycleParams> dynamics;

    [[nodiscard]] bool is_linear() const noexcept { return std::holds_alternative<LinearDynamics>(dynamics); }
    [[nodiscard]] bool is_bicycle() const noexcept { return std::holds_alternative<BicycleParams>(dynamics); }

    /// Throws std::invalid_argument when a type invariant is broken.
    void validate() const;
};

/// Unbounded linear model; bounds default to +-infinity.
SystemModel make_linear_model(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double dt);

/// Double integrator in `dims` spatial dimensions: state [p, v], x+ = [p + dt v, v + dt u].
SystemModel make_double_integrator(int dims, double dt);

/// Bicycle with the benchmark bounds: |delta| <= pi/7, |a| <= 1, v in [0, 4], x/y/psi free.
SystemModel make_bicycle_model(const BicycleParams& params, double dt);

/// Successor state x_{t+1} = f(x_t, u_t). RK4 over dt for the bicycle, exact update for linear models.
[[nodiscard]] State step(const SystemModel& model, const State& x, const Input& u);

struct StepJacobian {
    Eigen::MatrixXd A;  // d step / d x
    Eigen::MatrixXd B;  // d step / d u
};

/// Analytic Jacobian of `step` (differentiated through the RK4 stages for the bicycle).
[[nodiscard]] StepJacobian step_jacobian(const SystemModel& model, const State& x, const Input& u);

/// Slip angle beta = atan(l_r / (l_f + l_r) * tan(delta)). Requires |delta| < pi/2.
[[nodiscard]] double bicycle_slip_angle(double delta, const BicycleParams& params);

/// Continuous-time bicycle vector field.
[[nodiscard]] Eigen::Vector4d bicycle_derivative(const Eigen::Vector4d& x, const Eigen::Vector2d& u,
                                                 const BicycleParams& params);

/// Difference x - x_ref with heading components wrapped into (-pi, pi].
[[nodiscard]] Eigen::VectorXd wrapped_difference(const SystemModel& model, const State& x, const State& x_ref);

/// sqrt(sum_i w_i d_i^2) of the wrapped difference.
[[nodiscard]] double weighted_error(const SystemModel& model, const State& x, const State& x_ref,
                                    const Eigen::VectorXd& weights);

/// True iff the weighted (wrapped) error between x and x_F is at most tol.
[[nodiscard]] bool is_at_equilibrium(const SystemModel& model, const State& x, const State& x_final,
                                     const Eigen::VectorXd& weights, double tol);

/// Upper bound on the planar distance the system can cover in `steps` steps starting from x.
/// Infinite when the model has no such bound (linear systems with unbounded inputs).
[[nodiscard]] double reach_distance_bound(const SystemModel& model, const State& x, int steps);

/// Euclidean distance between the position components of two states (infinite for models without positions).
[[nodiscard]] double position_distance(const SystemModel& model, const State& a, const State& b);

double wrap_angle(double a);

}  // namespace dmpc

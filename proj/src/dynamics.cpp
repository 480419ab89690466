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


#include "dmpc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace dmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_dims(const SystemModel& model, const State& x, const Input& u) {
    if (x.size() != model.n || u.size() != model.m) {
        throw DimensionMismatch("step: expected x in R^" + std::to_string(model.n) + " and u in R^" +
                                std::to_string(model.m) + ", got " + std::to_string(x.size()) + " and " +
                                std::to_string(u.size()));
    }
}

// Jacobians of the continuous bicycle field.
void bicycle_field_jacobian(const Eigen::Vector4d& x, const Eigen::Vector2d& u, const BicycleParams& p,
                            Eigen::Matrix4d& Fx, Eigen::Matrix<double, 4, 2>& Fu) {
    const double k = p.l_r / (p.l_f + p.l_r);
    const double beta = bicycle_slip_angle(u(0), p);
    const double tan_d = std::tan(u(0));
    const double sec2 = 1.0 + tan_d * tan_d;
    const double dbeta = k * sec2 / (1.0 + k * k * tan_d * tan_d);
    const double psi = x(2);
    const double v = x(3);
    const double c = std::cos(psi + beta);
    const double s = std::sin(psi + beta);

    Fx.setZero();
    Fx(0, 2) = -v * s;
    Fx(0, 3) = c;
    Fx(1, 2) = v * c;
    Fx(1, 3) = s;
    Fx(2, 3) = std::sin(beta) / p.l_r;

    Fu.setZero();
    Fu(0, 0) = -v * s * dbeta;
    Fu(1, 0) = v * c * dbeta;
    Fu(2, 0) = v * std::cos(beta) * dbeta / p.l_r;
    Fu(3, 1) = 1.0;
}

}  // namespace

double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * std::numbers::pi);
    if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
    return a;
}

void SystemModel::validate() const {
    if (n < 1 || m < 1) throw std::invalid_argument("SystemModel: n and m must be >= 1");
    if (!(dt > 0.0)) throw std::invalid_argument("SystemModel: dt must be > 0");
    if (x_lo.size() != n || x_hi.size() != n || u_lo.size() != m || u_hi.size() != m || u_eq.size() != m) {
        throw DimensionMismatch("SystemModel: bound vectors do not match n/m");
    }
    if ((x_lo.array() > x_hi.array()).any() || (u_lo.array() > u_hi.array()).any()) {
        throw std::invalid_argument("SystemModel: lower bound exceeds upper bound");
    }
    for (int idx : angle_indices) {
        if (idx < 0 || idx >= n) throw std::invalid_argument("SystemModel: angle index out of range");
    }
    if (const auto* lin = std::get_if<LinearDynamics>(&dynamics)) {
        if (lin->A.rows() != n || lin->A.cols() != n || lin->B.rows() != n || lin->B.cols() != m) {
            throw DimensionMismatch("SystemModel: A/B shapes do not match n/m");
        }
    } else {
        const auto& p = std::get<BicycleParams>(dynamics);
        if (!(p.l_f > 0.0) || !(p.l_r > 0.0)) throw std::invalid_argument("BicycleParams: l_f and l_r must be > 0");
        if (n != 4 || m != 2) throw DimensionMismatch("SystemModel: bicycle needs n = 4, m = 2");
    }
}

SystemModel make_linear_model(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double dt) {
    SystemModel model;
    model.n = static_cast<int>(A.rows());
    model.m = static_cast<int>(B.cols());
    model.dt = dt;
    model.x_lo = Eigen::VectorXd::Constant(model.n, -kInf);
    model.x_hi = Eigen::VectorXd::Constant(model.n, kInf);
    model.u_lo = Eigen::VectorXd::Constant(model.m, -kInf);
    model.u_hi = Eigen::VectorXd::Constant(model.m, kInf);
    model.u_eq = Eigen::VectorXd::Zero(model.m);
    model.dynamics = LinearDynamics{A, B, 0};
    model.validate();
    return model;
}

SystemModel make_double_integrator(int dims, double dt) {
    if (dims < 1) throw std::invalid_argument("make_double_integrator: dims must be >= 1");
    const int n = 2 * dims;
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
    A.topRightCorner(dims, dims) = dt * Eigen::MatrixXd::Identity(dims, dims);
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, dims);
    B.bottomRows(dims) = dt * Eigen::MatrixXd::Identity(dims, dims);
    SystemModel model = make_linear_model(A, B, dt);
    std::get<LinearDynamics>(model.dynamics).double_integrator_dims = dims;
    return model;
}

SystemModel make_bicycle_model(const BicycleParams& params, double dt) {
    SystemModel model;
    model.n = 4;
    model.m = 2;
    model.dt = dt;
    // Heading is unwrapped, so its [0, 2pi] range is not imposed.
    model.x_lo = Eigen::Vector4d(-kInf, -kInf, -kInf, 0.0);
    model.x_hi = Eigen::Vector4d(kInf, kInf, kInf, 4.0);
    model.u_lo = Eigen::Vector2d(-std::numbers::pi / 7.0, -1.0);
    model.u_hi = Eigen::Vector2d(std::numbers::pi / 7.0, 1.0);
    model.u_eq = Eigen::Vector2d::Zero();
    model.angle_indices = {2};
    model.dynamics = params;
    model.validate();
    return model;
}

double bicycle_slip_angle(double delta, const BicycleParams& params) {
    return std::atan(params.l_r / (params.l_f + params.l_r) * std::tan(delta));
}

Eigen::Vector4d bicycle_derivative(const Eigen::Vector4d& x, const Eigen::Vector2d& u, const BicycleParams& params) {
    const double beta = bicycle_slip_angle(u(0), params);
    const double v = x(3);
    return {v * std::cos(x(2) + beta), v * std::sin(x(2) + beta), v / params.l_r * std::sin(beta), u(1)};
}

State step(const SystemModel& model, const State& x, const Input& u) {
    require_dims(model, x, u);
    if (const auto* lin = std::get_if<LinearDynamics>(&model.dynamics)) {
        return lin->A * x + lin->B * u;
    }
    const auto& p = std::get<BicycleParams>(model.dynamics);
    const Eigen::Vector4d x0 = x;
    const Eigen::Vector2d uu = u;
    const double h = model.dt;
    const Eigen::Vector4d k1 = bicycle_derivative(x0, uu, p);
    const Eigen::Vector4d k2 = bicycle_derivative(x0 + 0.5 * h * k1, uu, p);
    const Eigen::Vector4d k3 = bicycle_derivative(x0 + 0.5 * h * k2, uu, p);
    const Eigen::Vector4d k4 = bicycle_derivative(x0 + h * k3, uu, p);
    return x0 + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

StepJacobian step_jacobian(const SystemModel& model, const State& x, const Input& u) {
    require_dims(model, x, u);
    if (const auto* lin = std::get_if<LinearDynamics>(&model.dynamics)) {
        return {lin->A, lin->B};
    }
    const auto& p = std::get<BicycleParams>(model.dynamics);
    const Eigen::Vector4d x0 = x;
    const Eigen::Vector2d uu = u;
    const double h = model.dt;
    const Eigen::Matrix4d I = Eigen::Matrix4d::Identity();

    Eigen::Matrix4d F1x, F2x, F3x, F4x;
    Eigen::Matrix<double, 4, 2> F1u, F2u, F3u, F4u;

    const Eigen::Vector4d k1 = bicycle_derivative(x0, uu, p);
    bicycle_field_jacobian(x0, uu, p, F1x, F1u);
    const Eigen::Vector4d x2 = x0 + 0.5 * h * k1;
    const Eigen::Vector4d k2 = bicycle_derivative(x2, uu, p);
    bicycle_field_jacobian(x2, uu, p, F2x, F2u);
    const Eigen::Vector4d x3 = x0 + 0.5 * h * k2;
    const Eigen::Vector4d k3 = bicycle_derivative(x3, uu, p);
    bicycle_field_jacobian(x3, uu, p, F3x, F3u);
    const Eigen::Vector4d x4 = x0 + h * k3;
    bicycle_field_jacobian(x4, uu, p, F4x, F4u);

    const Eigen::Matrix4d dk1x = F1x;
    const Eigen::Matrix4d dk2x = F2x * (I + 0.5 * h * dk1x);
    const Eigen::Matrix4d dk3x = F3x * (I + 0.5 * h * dk2x);
    const Eigen::Matrix4d dk4x = F4x * (I + h * dk3x);

    const Eigen::Matrix<double, 4, 2> dk1u = F1u;
    const Eigen::Matrix<double, 4, 2> dk2u = F2x * (0.5 * h * dk1u) + F2u;
    const Eigen::Matrix<double, 4, 2> dk3u = F3x * (0.5 * h * dk2u) + F3u;
    const Eigen::Matrix<double, 4, 2> dk4u = F4x * (h * dk3u) + F4u;

    StepJacobian J;
    J.A = I + h / 6.0 * (dk1x + 2.0 * dk2x + 2.0 * dk3x + dk4x);
    J.B = h / 6.0 * (dk1u + 2.0 * dk2u + 2.0 * dk3u + dk4u);
    return J;
}

Eigen::VectorXd wrapped_difference(const SystemModel& model, const State& x, const State& x_ref) {
    if (x.size() != model.n || x_ref.size() != model.n) throw DimensionMismatch("wrapped_difference: bad state size");
    Eigen::VectorXd d = x - x_ref;
    for (int idx : model.angle_indices) d(idx) = wrap_angle(d(idx));
    return d;
}

double weighted_error(const SystemModel& model, const State& x, const State& x_ref, const Eigen::VectorXd& weights) {
    if (weights.size() != model.n) throw DimensionMismatch("weighted_error: weight size mismatch");
    const Eigen::VectorXd d = wrapped_difference(model, x, x_ref);
    return std::sqrt((weights.array() * d.array().square()).sum());
}

bool is_at_equilibrium(const SystemModel& model, const State& x, const State& x_final, const Eigen::VectorXd& weights,
                       double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("is_at_equilibrium: tol must be > 0");
    return weighted_error(model, x, x_final, weights) <= tol;
}

double reach_distance_bound(const SystemModel& model, const State& x, int steps) {
    const double T = steps * model.dt;
    if (model.is_bicycle()) {
        const double v_max = model.x_hi(3);
        const double a_max = std::max(std::abs(model.u_lo(1)), std::abs(model.u_hi(1)));
        const double v0 = std::clamp(x(3), 0.0, v_max);
        if (!std::isfinite(v_max)) return v0 * T + 0.5 * a_max * T * T;
        const double t1 = a_max > 0.0 ? (v_max - v0) / a_max : kInf;
        if (T <= t1) return v0 * T + 0.5 * a_max * T * T;
        return v0 * t1 + 0.5 * a_max * t1 * t1 + v_max * (T - t1);
    }
    const auto& lin = std::get<LinearDynamics>(model.dynamics);
    const int d = lin.double_integrator_dims;
    if (d == 0) return kInf;
    const Eigen::VectorXd a_abs = model.u_lo.cwiseAbs().cwiseMax(model.u_hi.cwiseAbs());
    const double a_max = a_abs.norm();
    if (!std::isfinite(a_max)) return kInf;
    const double v_cap = model.x_lo.tail(d).cwiseAbs().cwiseMax(model.x_hi.tail(d).cwiseAbs()).norm();
    // p_{k+1} = p_k + dt v_k, |v_k| <= min(|v_0| + k dt a_max, v_cap)
    double speed = x.tail(d).norm();
    double dist = 0.0;
    for (int k = 0; k < steps; ++k) {
        dist += model.dt * std::min(speed, v_cap);
        speed += model.dt * a_max;
    }
    return dist;
}

double position_distance(const SystemModel& model, const State& a, const State& b) {
    if (model.is_bicycle()) return (a.head<2>() - b.head<2>()).norm();
    const int d = std::get<LinearDynamics>(model.dynamics).double_integrator_dims;
    if (d == 0) return kInf;
    return (a.head(d) - b.head(d)).norm();
}

}  // namespace dmpc

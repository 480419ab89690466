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

#include <spdlog/spdlog.h>

#include "dmpc/harness.hpp"

namespace dmpc::harness {

namespace {

Input saturate(const SystemModel& model, const Input& u) { return u.cwiseMax(model.u_lo).cwiseMin(model.u_hi); }

// Point at arc length `lookahead` ahead of the projection of p onto the polyline, starting the
// search at segment `seg` so the tracker never goes back.
Eigen::Vector2d lookahead_point(const std::vector<Eigen::Vector2d>& path, const Eigen::Vector2d& p, int& seg,
                                double lookahead) {
    const int last = static_cast<int>(path.size()) - 1;
    double best = kInfiniteCost;
    int best_seg = seg;
    double best_s = 0.0;
    for (int i = seg; i < std::min(last, seg + 3); ++i) {
        const Eigen::Vector2d d = path[i + 1] - path[i];
        const double s = std::clamp((p - path[i]).dot(d) / d.squaredNorm(), 0.0, 1.0);
        const double dist = (path[i] + s * d - p).norm();
        if (dist < best) {
            best = dist;
            best_seg = i;
            best_s = s;
        }
    }
    seg = best_seg;
    double remaining = lookahead;
    int i = best_seg;
    Eigen::Vector2d from = path[i] + best_s * (path[i + 1] - path[i]);
    while (i < last) {
        const double len = (path[i + 1] - from).norm();
        if (len >= remaining) return from + remaining * (path[i + 1] - from) / len;
        remaining -= len;
        from = path[++i];
    }
    return path.back();
}

// Fixed-terminal solve from x to x_F; the first horizon that works is used.
std::optional<HorizonPlan> capture(const SystemModel& model, const ExperimentConfig& cfg, const State& x) {
    FixedTerminalProblem problem;
    problem.x0 = x;
    problem.terminal = cfg.x_final;
    problem.model = &model;
    problem.weights = CostWeights{cfg.P, cfg.R};
    for (int H = 2; H <= 3 * cfg.horizon; ++H) {
        problem.horizon = H;
        SolveResult res = solve_fixed_terminal(problem);
        if (res.feasible()) return std::move(res.plan);
    }
    return std::nullopt;
}

Trajectory bicycle_rollout(const SystemModel& model, const ExperimentConfig& cfg) {
    const auto& params = std::get<BicycleParams>(model.dynamics);
    const auto& spec = cfg.initial;
    std::vector<Eigen::Vector2d> path{cfg.x_start.head<2>()};
    path.insert(path.end(), spec.waypoints.begin(), spec.waypoints.end());
    if ((path.back() - cfg.x_final.head<2>()).norm() > 1e-9) path.push_back(cfg.x_final.head<2>());

    Trajectory traj;
    State x = cfg.x_start;
    traj.states.push_back(x);
    int seg = 0;
    const double wheelbase = params.l_f + params.l_r;
    while (traj.steps() < spec.max_steps) {
        const double dist_to_goal = (x.head<2>() - cfg.x_final.head<2>()).norm();
        if (dist_to_goal <= spec.capture_distance) {
            if (auto plan = capture(model, cfg, x)) {
                for (int k = 0; k < plan->horizon() && traj.steps() < spec.max_steps; ++k) {
                    x = step(model, x, plan->inputs[k]);
                    traj.inputs.push_back(plan->inputs[k]);
                    traj.states.push_back(x);
                }
                if (is_at_equilibrium(model, x, cfg.x_final, cfg.P, cfg.equilibrium_tolerance)) return traj;
                break;
            }
        }
        const Eigen::Vector2d target = lookahead_point(path, x.head<2>(), seg, spec.lookahead);
        const Eigen::Vector2d d = target - x.head<2>();
        const double alpha = wrap_angle(std::atan2(d.y(), d.x()) - x(2));
        const double ld = std::max(d.norm(), 1e-6);
        const double delta = std::atan(2.0 * wheelbase * std::sin(alpha) / ld);
        const double v_ref = std::min(spec.cruise_speed, std::max(cfg.x_final(3), 0.5 * dist_to_goal));
        const Input u = saturate(model, Eigen::Vector2d(delta, spec.speed_gain * (v_ref - x(3))));
        x = step(model, x, u);
        traj.inputs.push_back(u);
        traj.states.push_back(x);
    }
    throw InitialTrajectoryFailed("pure pursuit did not reach the x_F ball within " +
                                  std::to_string(spec.max_steps) + " steps");
}

Eigen::MatrixXd lqr_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::VectorXd& P,
                         const Eigen::VectorXd& R) {
    const Eigen::MatrixXd Q = P.asDiagonal();
    const Eigen::MatrixXd Rm = R.asDiagonal();
    Eigen::MatrixXd S = Q;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(B.cols(), A.rows());
    for (int it = 0; it < 10000; ++it) {
        const Eigen::MatrixXd BtS = B.transpose() * S;
        K = (Rm + BtS * B).ldlt().solve(BtS * A);
        const Eigen::MatrixXd next = Q + A.transpose() * S * (A - B * K);
        const double change = (next - S).cwiseAbs().maxCoeff();
        S = next;
        if (change < 1e-12 * (1.0 + S.cwiseAbs().maxCoeff())) break;
    }
    return K;
}

Trajectory linear_rollout(const SystemModel& model, const ExperimentConfig& cfg) {
    const auto& lin = std::get<LinearDynamics>(model.dynamics);
    const int d = lin.double_integrator_dims;
    Eigen::MatrixXd K;
    if (d > 0) {
        K = Eigen::MatrixXd::Zero(d, 2 * d);
        K.leftCols(d) = cfg.initial.kp * Eigen::MatrixXd::Identity(d, d);
        K.rightCols(d) = cfg.initial.kd * Eigen::MatrixXd::Identity(d, d);
    } else {
        K = lqr_gain(lin.A, lin.B, cfg.P, cfg.R);
    }
    Trajectory traj;
    State x = cfg.x_start;
    traj.states.push_back(x);
    while (!is_at_equilibrium(model, x, cfg.x_final, cfg.P, cfg.equilibrium_tolerance)) {
        if (traj.steps() >= cfg.initial.max_steps) {
            throw InitialTrajectoryFailed("feedback policy did not reach the x_F ball within " +
                                          std::to_string(cfg.initial.max_steps) + " steps");
        }
        const Input u = saturate(model, model.u_eq - K * (x - cfg.x_final));
        x = step(model, x, u);
        if (!x.allFinite()) throw InitialTrajectoryFailed("feedback policy diverged");
        traj.inputs.push_back(u);
        traj.states.push_back(x);
    }
    return traj;
}

}  // namespace

Trajectory generate_initial_trajectory(const ExperimentConfig& cfg, Predictor& pred) {
    cfg.validate();
    const SystemModel model = build_model(cfg.model);
    Trajectory traj;
    if (cfg.initial.from_file) {
        const auto rows = read_trajectories_csv(cfg.initial.path, model.n, model.m);
        if (rows.empty()) throw InitialTrajectoryFailed("no rows in " + cfg.initial.path.string());
        traj = trajectory_from_rows(rows.front());
        if (traj.steps() > cfg.initial.max_steps) {
            throw InitialTrajectoryFailed("initial trajectory file exceeds the step cap");
        }
        if (!is_at_equilibrium(model, traj.states.back(), cfg.x_final, cfg.P, cfg.equilibrium_tolerance)) {
            throw InitialTrajectoryFailed("initial trajectory file does not end in the x_F ball");
        }
    } else if (model.is_bicycle()) {
        traj = bicycle_rollout(model, cfg);
    } else {
        traj = linear_rollout(model, cfg);
    }

    traj.stage_costs.clear();
    const CostWeights weights{cfg.P, cfg.R};
    const std::vector<double> z =
        traj.inputs.empty() ? std::vector<double>{} : pred.predict_segment(traj.states, traj.inputs);
    for (int t = 0; t < traj.steps(); ++t) {
        traj.stage_costs.push_back({known_stage_cost_h(traj.states[t], traj.inputs[t], cfg.x_final, weights), z[t]});
        if (!std::isfinite(z[t])) throw InitialTrajectoryFailed("initial trajectory violates the black-box constraint");
    }
    HorizonPlan check;
    check.states = traj.states;
    check.inputs = traj.inputs;
    if (bound_violation(model, check) > 1e-9) throw InitialTrajectoryFailed("initial trajectory violates the bounds");
    spdlog::debug("initial trajectory: {} steps", traj.steps());
    return compute_cost_to_go(std::move(traj));
}

}  // namespace dmpc::harness

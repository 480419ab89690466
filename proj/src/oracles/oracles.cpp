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


#include "dmpc/oracles.hpp"

#include <random>
#include <stdexcept>

namespace dmpc::oracles {

QpSolution fixed_terminal_kkt(const FixedTerminalProblem& problem) {
    problem.validate();
    const SystemModel& model = *problem.model;
    if (!model.is_linear()) throw std::invalid_argument("fixed_terminal_kkt: linear models only");
    const auto& lin = std::get<LinearDynamics>(model.dynamics);
    const int n = model.n;
    const int m = model.m;
    const int N = problem.horizon;

    // z = [u_0 .. u_{N-1}, x_1 .. x_N]
    const int nu = N * m;
    const int nz = nu + N * n;
    const int nc = N * n + n;
    auto ui = [&](int k) { return k * m; };
    auto xi = [&](int k) { return nu + (k - 1) * n; };

    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(nz, nz);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(nz);
    const Eigen::VectorXd& s = problem.terminal;
    for (int k = 0; k < N; ++k) {
        H.block(ui(k), ui(k), m, m) = 2.0 * problem.weights.R.asDiagonal();
        if (k >= 1) {
            H.block(xi(k), xi(k), n, n) = 2.0 * problem.weights.P.asDiagonal();
            g.segment(xi(k), n) = -2.0 * problem.weights.P.cwiseProduct(s);
        }
    }

    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(nc, nz);
    Eigen::VectorXd d = Eigen::VectorXd::Zero(nc);
    for (int k = 0; k < N; ++k) {
        const int row = k * n;
        C.block(row, xi(k + 1), n, n) = Eigen::MatrixXd::Identity(n, n);
        C.block(row, ui(k), n, m) = -lin.B;
        if (k == 0) {
            d.segment(row, n) = lin.A * problem.x0;
        } else {
            C.block(row, xi(k), n, n) = -lin.A;
        }
    }
    C.block(N * n, xi(N), n, n) = Eigen::MatrixXd::Identity(n, n);
    d.segment(N * n, n) = s;

    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nz + nc, nz + nc);
    K.topLeftCorner(nz, nz) = H;
    K.topRightCorner(nz, nc) = C.transpose();
    K.bottomLeftCorner(nc, nz) = C;
    Eigen::VectorXd rhs(nz + nc);
    rhs << -g, d;
    const Eigen::VectorXd sol = K.fullPivLu().solve(rhs);

    QpSolution out;
    out.states.push_back(problem.x0);
    for (int k = 1; k <= N; ++k) out.states.push_back(sol.segment(xi(k), n));
    for (int k = 0; k < N; ++k) out.inputs.push_back(sol.segment(ui(k), m));
    for (int k = 0; k < N; ++k) {
        out.cost += terminal_relative_stage_cost_ell(out.states[k], out.inputs[k], s, problem.weights);
    }
    out.cost += (N + 1) * problem.q_term;
    return out;
}

QpSolution full_horizon_kkt(const SystemModel& model, const CostWeights& weights, const State& x_start,
                            const State& x_final, int T) {
    FixedTerminalProblem problem;
    problem.x0 = x_start;
    problem.terminal = x_final;
    problem.horizon = T;
    problem.model = &model;
    problem.weights = weights;
    return fixed_terminal_kkt(problem);
}

EnumerationResult enumerate_terminal(const State& x_t, const SafeSet& ss, Predictor& pred, const DmpcConfig& cfg,
                                     std::span<const Input> warm_inputs) {
    EnumerationResult out;
    double best = kInfiniteCost;
    for (int r = 0; r < ss.size(); ++r) {
        FixedTerminalProblem problem;
        problem.x0 = x_t;
        problem.terminal = ss.candidates[r];
        problem.horizon = cfg.horizon;
        problem.model = &cfg.model;
        problem.weights = cfg.weights;
        problem.q_term = ss.base_cost_to_go[r];
        SolveResult res = solve_fixed_terminal(problem, warm_inputs, cfg.solver);
        if (!res.feasible()) continue;
        ++out.feasible;
        HorizonPlan plan = std::move(res.plan);
        plan.terminal_index = r;
        plan.stage_z = pred.predict_segment(plan.states, plan.inputs);
        ++out.queries;
        double z = 0.0;
        for (double v : plan.stage_z) z += v;
        plan.z_sum = z;
        plan.J_overall = plan.J_model + z;
        if (plan.J_overall < best) {
            best = plan.J_overall;
            out.index = r;
            out.plan = std::move(plan);
        }
    }
    return out;
}

LazyInstance random_lazy_instance(std::uint64_t seed, int max_candidates) {
    if (max_candidates < 2) throw std::invalid_argument("random_lazy_instance: need at least 2 candidates");
    std::mt19937_64 rng(seed);
    auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

    LazyInstance inst;
    DmpcConfig& cfg = inst.cfg;
    cfg.model = make_double_integrator(2, 0.5);
    cfg.model.u_lo.setConstant(-1.0);
    cfg.model.u_hi.setConstant(1.0);
    cfg.weights = CostWeights{Eigen::Vector4d(1.0, 1.0, 0.5, 0.5), Eigen::Vector2d(0.1, 0.1)};
    cfg.x_final = Eigen::Vector4d::Zero();
    cfg.horizon = 6;
    cfg.execution = Execution::kSerial;

    const double angle = uniform(0.0, 2.0 * std::numbers::pi);
    const double radius = uniform(2.0, 5.0);
    cfg.x_start = Eigen::Vector4d(radius * std::cos(angle), radius * std::sin(angle), 0.0, 0.0);

    // Feedback rollout truncated to the candidate budget; the last state is replaced by x_F in the safe set.
    const double kp = uniform(0.3, 0.8);
    const double kd = uniform(0.8, 1.5);
    const int steps = std::uniform_int_distribution<int>(std::max(1, max_candidates - 5), max_candidates - 1)(rng);
    Trajectory& prev = inst.prev;
    State x = cfg.x_start;
    prev.states.push_back(x);
    for (int t = 0; t < steps; ++t) {
        Input u = (-kp * x.head<2>() - kd * x.tail<2>()).cwiseMax(-1.0).cwiseMin(1.0);
        x = step(cfg.model, x, u);
        prev.inputs.push_back(u);
        prev.states.push_back(x);
    }

    const int nb = std::uniform_int_distribution<int>(1, 4)(rng);
    for (int i = 0; i < nb; ++i) {
        const int at = std::uniform_int_distribution<int>(0, steps)(rng);
        inst.bumps.push_back({prev.states[at](0) + uniform(-1.0, 1.0), prev.states[at](1) + uniform(-1.0, 1.0),
                              uniform(0.5, 8.0), uniform(0.3, 1.5)});
    }
    GaussianBumpField field(inst.bumps);
    const std::vector<double> z = field.predict_segment(prev.states, prev.inputs);
    for (int t = 0; t < steps; ++t) {
        prev.stage_costs.push_back(
            {known_stage_cost_h(prev.states[t], prev.inputs[t], cfg.x_final, cfg.weights), z[t]});
    }
    prev = compute_cost_to_go(std::move(prev));

    inst.x_t = cfg.x_start + Eigen::Vector4d(uniform(-0.2, 0.2), uniform(-0.2, 0.2), 0.0, 0.0);
    return inst;
}

}  // namespace dmpc::oracles

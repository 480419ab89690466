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


#include "dmpc/dmpc.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace dmpc {

namespace {

constexpr double kShiftMatchTolerance = 1e-6;

double sum(const std::vector<double>& v, std::size_t from = 0) {
    return std::accumulate(v.begin() + static_cast<std::ptrdiff_t>(std::min(from, v.size())), v.end(), 0.0);
}

std::vector<Input> warm_from_trajectory(const Trajectory& prev, int t, int horizon) {
    std::vector<Input> warm;
    for (int k = t; k < std::min(t + horizon, prev.steps()); ++k) warm.push_back(prev.inputs[k]);
    return warm;
}

std::vector<Input> warm_from_plan(const HorizonPlan& plan, const Trajectory& prev, const SystemModel& model) {
    std::vector<Input> warm(plan.inputs.begin() + 1, plan.inputs.end());
    const int tau = plan.terminal_index;
    warm.push_back(tau >= 0 && tau < prev.steps() ? prev.inputs[tau] : model.u_eq);
    return warm;
}

}  // namespace

void DmpcConfig::validate() const {
    model.validate();
    weights.validate();
    if (weights.P.size() != model.n || weights.R.size() != model.m) {
        throw DimensionMismatch("DmpcConfig: weights do not match the model");
    }
    if (x_start.size() != model.n || x_final.size() != model.n) {
        throw DimensionMismatch("DmpcConfig: x_start/x_final do not match the model");
    }
    if (horizon < 1) throw std::invalid_argument("DmpcConfig: horizon must be >= 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("DmpcConfig: epsilon must be > 0");
    if (!(equilibrium_tolerance > 0.0)) throw std::invalid_argument("DmpcConfig: equilibrium tolerance must be > 0");
    if (max_steps_per_iteration < 1 || max_iterations < 1) throw std::invalid_argument("DmpcConfig: caps must be >= 1");
}

int SafeSet::feasible_count() const noexcept {
    return static_cast<int>(std::count(status.begin(), status.end(), CandidateStatus::kFeasible));
}

void SafeSet::begin_step() {
    Q = base_cost_to_go;
    visited.clear();
    status.assign(candidates.size(), CandidateStatus::kUnsolved);
    plans.assign(candidates.size(), HorizonPlan{});
}

Trajectory compute_cost_to_go(Trajectory traj) {
    if (traj.stage_costs.size() != traj.inputs.size() || traj.states.size() != traj.inputs.size() + 1) {
        throw std::invalid_argument("compute_cost_to_go: trajectory records are not aligned");
    }
    const std::size_t T = traj.inputs.size();
    traj.cost_to_go.assign(T + 1, 0.0);
    for (std::size_t t = T; t-- > 0;) {
        traj.cost_to_go[t] = traj.stage_costs[t].h_val + traj.stage_costs[t].z_val + traj.cost_to_go[t + 1];
    }
    return traj;
}

SafeSet build_safe_set(const Trajectory& prev, const State& x_final) {
    if (prev.states.empty()) throw std::invalid_argument("build_safe_set: empty trajectory");
    const Trajectory& src = prev.cost_to_go.size() == prev.states.size() ? prev : compute_cost_to_go(prev);
    SafeSet ss;
    ss.candidates = prev.states;
    ss.candidates.back() = x_final;
    ss.base_cost_to_go = src.cost_to_go;
    ss.base_cost_to_go.back() = 0.0;
    ss.begin_step();
    return ss;
}

bool trivially_unreachable(const SystemModel& model, const State& x, const State& target, int steps,
                           double radius_factor) {
    if (radius_factor <= 0.0) return false;
    const double reach = reach_distance_bound(model, x, steps);
    if (std::isfinite(reach) && position_distance(model, x, target) > radius_factor * reach + 1e-9) return true;

    const double T = steps * model.dt;
    if (model.is_bicycle()) {
        const double a_max = std::max(std::abs(model.u_lo(1)), std::abs(model.u_hi(1)));
        return std::abs(target(3) - x(3)) > radius_factor * a_max * T + 1e-9;
    }
    const int d = std::get<LinearDynamics>(model.dynamics).double_integrator_dims;
    if (d == 0) return false;
    const double a_max = model.u_lo.cwiseAbs().cwiseMax(model.u_hi.cwiseAbs()).norm();
    if (!std::isfinite(a_max)) return false;
    return (target.tail(d) - x.tail(d)).norm() > radius_factor * a_max * T + 1e-9;
}

HorizonPlan select_terminal_lazy(const State& x_t, SafeSet& ss, Predictor& pred, const DmpcConfig& cfg,
                                 std::span<const Input> warm_inputs) {
    if (ss.candidates.empty()) throw std::invalid_argument("select_terminal_lazy: empty safe set");
    ss.begin_step();

    CandidateBatch batch;
    batch.model = &cfg.model;
    batch.weights = cfg.weights;
    batch.x_t = x_t;
    batch.horizon = cfg.horizon;
    batch.targets = ss.candidates;
    batch.q_terms = ss.base_cost_to_go;
    batch.warm_inputs = warm_inputs;
    batch.options = cfg.solver;
    batch.skip.assign(ss.candidates.size(), 0);
    for (int r = 0; r < ss.size(); ++r) {
        batch.skip[r] = trivially_unreachable(cfg.model, x_t, ss.candidates[r], cfg.horizon, cfg.pruning_radius_factor);
    }

    auto outcomes = solve_candidates(batch, cfg.execution);
    for (int r = 0; r < ss.size(); ++r) {
        auto& out = outcomes[r];
        if (out.pruned) {
            ss.status[r] = CandidateStatus::kPruned;
        } else if (out.result.feasible()) {
            ss.status[r] = CandidateStatus::kFeasible;
            ss.plans[r] = std::move(out.result.plan);
        } else {
            ss.status[r] = CandidateStatus::kInfeasible;
        }
    }

    for (;;) {
        int best = -1;
        double best_score = kInfiniteCost;
        for (int r = 0; r < ss.size(); ++r) {
            if (ss.status[r] != CandidateStatus::kFeasible) continue;
            const HorizonPlan& plan = ss.plans[r];
            const double score = ss.visited.contains(r) ? plan.J_model + *plan.z_sum : plan.J_model;
            if (score < best_score) {
                best_score = score;
                best = r;
            }
        }
        if (best < 0) {
            throw NoFeasibleCandidate("no reachable terminal candidate among " + std::to_string(ss.size()) +
                                      " safe-set states");
        }
        HorizonPlan& plan = ss.plans[best];
        if (ss.visited.contains(best)) {
            HorizonPlan chosen = plan;
            chosen.J_overall = best_score;
            return chosen;
        }
        plan.stage_z = pred.predict_segment(plan.states, plan.inputs);
        plan.z_sum = sum(plan.stage_z);
        plan.J_overall = plan.J_model + *plan.z_sum;
        ss.Q[best] += *plan.z_sum;
        ss.visited.insert(best);
    }
}

HorizonPlan shifted_plan(const HorizonPlan& prev_plan, const Trajectory& prev_traj, const SafeSet& ss,
                         Predictor& pred, const DmpcConfig& cfg) {
    const int N = prev_plan.horizon();
    if (N < 1 || prev_plan.states.size() != static_cast<std::size_t>(N + 1)) {
        throw std::invalid_argument("shifted_plan: malformed previous plan");
    }
    const int tau = prev_plan.terminal_index;
    const int last = ss.last_index();
    if (tau < 0 || tau > last) throw std::invalid_argument("shifted_plan: terminal index outside the safe set");

    HorizonPlan b;
    b.source = PlanSource::kShifted;
    b.states.assign(prev_plan.states.begin() + 1, prev_plan.states.end());
    b.inputs.assign(prev_plan.inputs.begin() + 1, prev_plan.inputs.end());
    b.stage_ell.assign(prev_plan.stage_ell.begin() + 1, prev_plan.stage_ell.end());
    if (prev_plan.stage_z.size() == prev_plan.inputs.size()) {
        b.stage_z.assign(prev_plan.stage_z.begin() + 1, prev_plan.stage_z.end());
    }

    const bool need_prediction = cfg.repredict_shifted || b.stage_z.size() != b.inputs.size();
    if (need_prediction && !b.inputs.empty()) {
        b.stage_z = pred.predict_segment(std::span<const State>(b.states.data(), b.inputs.size() + 1), b.inputs);
    }

    const double retained_ell = sum(b.stage_ell);
    const double retained_z = sum(b.stage_z);
    double tail = 0.0;
    if (tau >= last) {
        b.states.push_back(ss.candidates[last]);
        b.inputs.push_back(cfg.model.u_eq);
        b.stage_ell.push_back(0.0);
        b.stage_z.push_back(0.0);
        b.terminal_index = last;
    } else {
        b.states.push_back(ss.candidates[tau + 1]);
        b.inputs.push_back(prev_traj.inputs[tau]);
        b.stage_ell.push_back(prev_traj.stage_costs[tau].h_val);
        b.stage_z.push_back(prev_traj.stage_costs[tau].z_val);
        b.terminal_index = tau + 1;
        tail = N * ss.base_cost_to_go[tau] + ss.base_cost_to_go[tau + 1];
    }
    b.J_model = retained_ell + tail;
    b.z_sum = retained_z;
    b.J_overall = b.J_model + retained_z;
    b.defect = dynamics_defect(cfg.model, b);
    return b;
}

StepResult dmpc_step(const State& x_t, SafeSet& ss, const HorizonPlan* prev_plan, const Trajectory& prev_traj,
                     Predictor& pred, const DmpcConfig& cfg, std::span<const Input> warm_inputs) {
    StepResult res;
    std::optional<HorizonPlan> optimized;
    std::optional<HorizonPlan> shifted;

    if (prev_plan != nullptr) {
        HorizonPlan b = shifted_plan(*prev_plan, prev_traj, ss, pred, cfg);
        if ((b.states.front() - x_t).cwiseAbs().maxCoeff() <= kShiftMatchTolerance && !std::isnan(b.J_overall)) {
            shifted = std::move(b);
        }
    }
    try {
        optimized = select_terminal_lazy(x_t, ss, pred, cfg, warm_inputs);
    } catch (const NoFeasibleCandidate&) {
        if (!shifted) throw;
    }
    res.queries = static_cast<int>(ss.visited.size());
    res.feasible_candidates = ss.feasible_count();

    if (optimized) res.optimized_cost = optimized->J_overall;
    if (shifted) res.shifted_cost = shifted->J_overall;
    if (optimized && (!shifted || optimized->J_overall <= shifted->J_overall)) {
        res.accepted = std::move(*optimized);
    } else {
        res.accepted = std::move(*shifted);
    }
    res.applied = res.accepted.inputs.front();
    res.next = step(cfg.model, x_t, res.applied);
    return res;
}

IterationResult run_iteration(const Trajectory& prev, Predictor& pred, const DmpcConfig& cfg) {
    SafeSet ss = build_safe_set(prev, cfg.x_final);
    IterationResult out;
    Trajectory& traj = out.trajectory;
    const std::uint64_t q0 = pred.query_count();
    const std::uint64_t s0 = pred.sample_count();

    State x = cfg.x_start;
    traj.states.push_back(x);
    std::optional<HorizonPlan> prev_plan;

    for (int t = 0;; ++t) {
        if (is_at_equilibrium(cfg.model, x, cfg.x_final, cfg.weights.P, cfg.equilibrium_tolerance)) break;
        if (t >= cfg.max_steps_per_iteration) {
            throw StepLimitExceeded("rollout did not reach the equilibrium ball within " +
                                    std::to_string(cfg.max_steps_per_iteration) + " steps");
        }
        const std::vector<Input> warm =
            prev_plan ? warm_from_plan(*prev_plan, prev, cfg.model) : warm_from_trajectory(prev, t, cfg.horizon);
        StepResult res = dmpc_step(x, ss, prev_plan ? &*prev_plan : nullptr, prev, pred, cfg, warm);

        StepLog log;
        log.t = t;
        log.source = res.accepted.source;
        log.terminal_index = res.accepted.terminal_index;
        log.accepted_cost = res.accepted.J_overall;
        log.optimized_cost = res.optimized_cost.value_or(kInfiniteCost);
        log.shifted_cost = res.shifted_cost.value_or(kInfiniteCost);
        log.queries = res.queries;
        log.feasible_candidates = res.feasible_candidates;
        if (prev_plan) {
            // J_t <= J_{t-1} - (ell + zhat of the step just applied) - (q(x_tau) - q(x_{tau+1}))
            const int tau = prev_plan->terminal_index;
            const double q_drop = tau < ss.last_index() ? ss.base_cost_to_go[tau] - ss.base_cost_to_go[tau + 1] : 0.0;
            log.descent_bound =
                prev_plan->J_overall - prev_plan->stage_ell.front() - prev_plan->stage_z.front() - q_drop;
            log.descent_ok = log.accepted_cost <= log.descent_bound + cfg.monotonicity_tolerance;
            if (!log.descent_ok) ++out.descent_violations;
        }
        out.enumeration_samples += static_cast<std::uint64_t>(res.feasible_candidates) * cfg.horizon + 1;
        out.steps.push_back(log);

        const State next = res.next;
        const std::array<State, 2> realized{x, next};
        const std::array<Input, 1> applied{res.applied};
        const double z = pred.predict_segment(realized, applied).front();
        traj.inputs.push_back(res.applied);
        traj.stage_costs.push_back({known_stage_cost_h(x, res.applied, cfg.x_final, cfg.weights), z});
        traj.states.push_back(next);
        prev_plan = std::move(res.accepted);
        x = next;
    }
    traj = compute_cost_to_go(std::move(traj));
    out.queries = pred.query_count() - q0;
    out.samples = pred.sample_count() - s0;
    return out;
}

double trajectory_difference(const Trajectory& a, const Trajectory& b, const State& x_final) {
    const std::size_t len = std::max(a.states.size(), b.states.size());
    double delta = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
        const State& xa = t < a.states.size() ? a.states[t] : x_final;
        const State& xb = t < b.states.size() ? b.states[t] : x_final;
        delta += (xa - xb).cwiseAbs().sum();
    }
    return delta;
}

RunResult run(const Trajectory& initial, Predictor& pred, const DmpcConfig& cfg,
              const std::function<void(const IterationReport&)>& on_iteration) {
    cfg.validate();
    RunResult result;
    result.trajectories.push_back(compute_cost_to_go(initial));
    result.step_logs.emplace_back();

    IterationReport first;
    first.iteration = 0;
    first.overall_cost = trajectory_overall_cost(result.trajectories.front());
    first.steps = initial.steps();
    result.report.iterations.push_back(first);
    if (on_iteration) on_iteration(first);

    for (int j = 1; j <= cfg.max_iterations; ++j) {
        IterationResult it = run_iteration(result.trajectories.back(), pred, cfg);
        const IterationReport& prev = result.report.iterations.back();

        IterationReport rep;
        rep.iteration = j;
        rep.overall_cost = trajectory_overall_cost(it.trajectory);
        rep.steps = it.trajectory.steps();
        rep.blackbox_queries = it.queries;
        rep.blackbox_samples = it.samples;
        rep.enumeration_samples = it.enumeration_samples;
        rep.delta_to_prev = trajectory_difference(it.trajectory, result.trajectories.back(), cfg.x_final);
        rep.converged = rep.delta_to_prev < cfg.epsilon;
        rep.monotone = rep.overall_cost <= prev.overall_cost + cfg.monotonicity_tolerance;
        rep.descent_violations = it.descent_violations;

        auto& report = result.report;
        if (!rep.monotone) ++report.monotonicity_violations;
        report.descent_violations += rep.descent_violations;
        report.total_blackbox_samples += rep.blackbox_samples;
        report.total_enumeration_samples += rep.enumeration_samples;
        report.iterations.push_back(rep);
        result.trajectories.push_back(std::move(it.trajectory));
        result.step_logs.push_back(std::move(it.steps));
        if (on_iteration) on_iteration(rep);
        if (rep.converged) {
            report.converged = true;
            break;
        }
    }
    return result;
}

}  // namespace dmpc

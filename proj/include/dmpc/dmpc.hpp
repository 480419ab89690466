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

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dmpc/blackbox.hpp"
#include "dmpc/candidates.hpp"
#include "dmpc/costs.hpp"
#include "dmpc/dynamics.hpp"
#include "dmpc/trajopt.hpp"

namespace dmpc {

/// Every candidate solve was infeasible (or priced at kInfiniteCost by the black box).
class NoFeasibleCandidate : public std::runtime_error {
public:
    explicit NoFeasibleCandidate(const std::string& what) : std::runtime_error(what) {}
};

/// A rollout did not enter the equilibrium ball within max_steps_per_iteration.
class StepLimitExceeded : public std::runtime_error {
public:
    explicit StepLimitExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct DmpcConfig {
    SystemModel model;
    CostWeights weights;
    State x_start;
    State x_final;
    int horizon{12};
    double epsilon{1e-4};
    double equilibrium_tolerance{0.15};
    int max_steps_per_iteration{200};
    int max_iterations{10};
    /// Candidates farther than factor * (reachable distance bound) are not solved. <= 0 disables.
    double pruning_radius_factor{1.0};
    /// Re-query the black box for the retained steps of a shifted plan instead of reusing stored values.
    bool repredict_shifted{false};
    double monotonicity_tolerance{1e-6};
    Execution execution{Execution::kParallel};
    SolverOptions solver;

    void validate() const;
};

enum class CandidateStatus { kUnsolved, kPruned, kInfeasible, kFeasible };

/// Terminal candidates for one iteration: the previous trajectory's states, its final state
/// recorded as x_F. Q, the visited set and the plan cache are per time step.
struct SafeSet {
    std::vector<State> candidates;
    std::vector<double> base_cost_to_go;
    std::vector<double> Q;
    std::set<int> visited;
    std::vector<CandidateStatus> status;
    std::vector<HorizonPlan> plans;

    [[nodiscard]] int size() const noexcept { return static_cast<int>(candidates.size()); }
    [[nodiscard]] int last_index() const noexcept { return size() - 1; }
    [[nodiscard]] int feasible_count() const noexcept;

    /// Resets Q to the base cost-to-go and clears I and the cache.
    void begin_step();
};

/// q_T = 0, q_t = h_t + zhat_t + q_{t+1}.
[[nodiscard]] Trajectory compute_cost_to_go(Trajectory traj);

[[nodiscard]] SafeSet build_safe_set(const Trajectory& prev, const State& x_final);

/// True when `target` provably cannot be reached from `x` in `steps` steps (distance or speed change
/// exceeds what the input bounds allow, scaled by `radius_factor`).
[[nodiscard]] bool trivially_unreachable(const SystemModel& model, const State& x, const State& target, int steps,
                                         double radius_factor);

/// Solves every candidate (memoized in `ss`), then runs the lazy loop: take the argmin of
/// J_model (+ zhat sum for visited candidates); if it was already visited, return it, otherwise
/// query the black box for its plan, add the result to Q and mark it visited. Ties go to the lowest index.
[[nodiscard]] HorizonPlan select_terminal_lazy(const State& x_t, SafeSet& ss, Predictor& pred, const DmpcConfig& cfg,
                                               std::span<const Input> warm_inputs = {});

/// Drop the first step of `prev_plan` and append the successor of its terminal state on the previous
/// trajectory (hold at x_F when the terminal already is x_F). Retained stage costs are reused.
[[nodiscard]] HorizonPlan shifted_plan(const HorizonPlan& prev_plan, const Trajectory& prev_traj, const SafeSet& ss,
                                       Predictor& pred, const DmpcConfig& cfg);

struct StepResult {
    Input applied;
    State next;
    HorizonPlan accepted;
    std::optional<double> optimized_cost;
    std::optional<double> shifted_cost;
    int queries{0};
    int feasible_candidates{0};
};

/// One receding-horizon step: optimized candidate vs. shifted candidate, lower overall cost wins
/// (ties go to the optimized plan), first input applied.
[[nodiscard]] StepResult dmpc_step(const State& x_t, SafeSet& ss, const HorizonPlan* prev_plan,
                                   const Trajectory& prev_traj, Predictor& pred, const DmpcConfig& cfg,
                                   std::span<const Input> warm_inputs = {});

struct StepLog {
    int t{0};
    PlanSource source{PlanSource::kOptimized};
    int terminal_index{-1};
    double accepted_cost{0.0};
    double optimized_cost{kInfiniteCost};
    double shifted_cost{kInfiniteCost};
    int queries{0};
    int feasible_candidates{0};
    /// Upper bound on this step's accepted cost implied by the previous step (descent inequality).
    double descent_bound{kInfiniteCost};
    bool descent_ok{true};
};

struct IterationResult {
    Trajectory trajectory;
    std::vector<StepLog> steps;
    std::uint64_t queries{0};
    std::uint64_t samples{0};
    /// Samples a selection that queried every feasible candidate would have used.
    std::uint64_t enumeration_samples{0};
    int descent_violations{0};
};

[[nodiscard]] IterationResult run_iteration(const Trajectory& prev, Predictor& pred, const DmpcConfig& cfg);

struct IterationReport {
    int iteration{0};
    double overall_cost{0.0};
    int steps{0};
    std::uint64_t blackbox_queries{0};
    std::uint64_t blackbox_samples{0};
    std::uint64_t enumeration_samples{0};
    double delta_to_prev{kInfiniteCost};
    bool converged{false};
    bool monotone{true};
    int descent_violations{0};
};

struct ConvergenceReport {
    std::vector<IterationReport> iterations;
    bool converged{false};
    int monotonicity_violations{0};
    int descent_violations{0};
    std::uint64_t total_blackbox_samples{0};
    std::uint64_t total_enumeration_samples{0};
};

struct RunResult {
    std::vector<Trajectory> trajectories;  // [0] is the initial trajectory
    std::vector<std::vector<StepLog>> step_logs;
    ConvergenceReport report;
};

/// Sum over t of |x_t^a - x_t^b|_1, the shorter trajectory padded with x_F.
[[nodiscard]] double trajectory_difference(const Trajectory& a, const Trajectory& b, const State& x_final);

/// Iterates run_iteration until the trajectory difference drops below epsilon or max_iterations.
[[nodiscard]] RunResult run(const Trajectory& initial, Predictor& pred, const DmpcConfig& cfg,
                            const std::function<void(const IterationReport&)>& on_iteration = {});

}  // namespace dmpc

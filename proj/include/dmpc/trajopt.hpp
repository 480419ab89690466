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

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "dmpc/costs.hpp"
#include "dmpc/dynamics.hpp"

namespace dmpc {

/// Reach `terminal` from `x0` in exactly `horizon` steps, minimizing
///   sum_k ell(x_k, u_k; terminal) + (horizon + 1) * q_term
/// subject to the dynamics and the model's box bounds.
struct FixedTerminalProblem {
    State x0;
    State terminal;
    int horizon{1};
    const SystemModel* model{nullptr};
    CostWeights weights;
    double q_term{0.0};

    void validate() const;
};

enum class PlanSource { kOptimized, kShifted };

[[nodiscard]] std::string_view to_string(PlanSource source) noexcept;

/// An N-step plan. `stage_ell` and `stage_z` are aligned with `inputs`; `stage_z` is empty until the
/// black box has been queried (or copied from the plan a shifted plan was built from).
struct HorizonPlan {
    std::vector<State> states;
    std::vector<Input> inputs;
    std::vector<double> stage_ell;
    std::vector<double> stage_z;
    double J_model{0.0};
    std::optional<double> z_sum;
    double J_overall{kInfiniteCost};
    int terminal_index{-1};
    double defect{0.0};
    PlanSource source{PlanSource::kOptimized};

    [[nodiscard]] int horizon() const noexcept { return static_cast<int>(inputs.size()); }
};

struct SolverOptions {
    double terminal_tolerance{1e-4};   // residual above this after the budget means Infeasible
    double target_residual{1e-10};     // residual the iteration drives towards
    double dynamics_tolerance{1e-6};
    double bound_tolerance{1e-9};
    int max_iterations{200};
    int max_penalty_updates{20};
    double initial_penalty{1.0};  // l1 merit weight on the constraint violation
    double max_penalty{1e10};
    bool record_merit_history{false};
};

enum class SolveStatus { kSolved, kInfeasible };

struct SolveDiagnostics {
    int penalty_updates{0};
    int iterations{0};
    double terminal_residual{0.0};
    double bound_violation{0.0};
    /// l1 merit after each accepted iteration, one vector per merit weight.
    std::vector<std::vector<double>> merit_history;
};

struct SolveResult {
    SolveStatus status{SolveStatus::kInfeasible};
    HorizonPlan plan;
    SolveDiagnostics diagnostics;

    [[nodiscard]] bool feasible() const noexcept { return status == SolveStatus::kSolved; }
};

/// Single shooting on the input sequence, solved by Gauss-Newton SQP: each step is a dense QP with
/// the terminal equality and the state bounds linearized and the input box exact. `warm_inputs`
/// seeds the input sequence (padded with the equilibrium input when shorter than the horizon).
///
/// Infeasible is an ordinary outcome: it means the terminal residual could not be brought under
/// `terminal_tolerance`, i.e. the target is treated as outside the N-step reachable set.
[[nodiscard]] SolveResult solve_fixed_terminal(const FixedTerminalProblem& problem,
                                               std::span<const Input> warm_inputs = {},
                                               const SolverOptions& options = {});

/// Max over k of |x_{k+1} - step(x_k, u_k)|_inf, recomputed through the dynamics.
[[nodiscard]] double dynamics_defect(const SystemModel& model, const HorizonPlan& plan);

/// Largest amount by which any plan state or input leaves the model's box.
[[nodiscard]] double bound_violation(const SystemModel& model, const HorizonPlan& plan);

}  // namespace dmpc

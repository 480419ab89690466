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

#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "dmpc/dynamics.hpp"

namespace dmpc {

/// Cost value that signals a violated (black-box) constraint. Every finite cost beats it.
inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

/// Diagonal tuning weights; P acts on states, R on inputs.
struct CostWeights {
    Eigen::VectorXd P;
    Eigen::VectorXd R;

    void validate() const;
};

struct StageCostRecord {
    double h_val{0.0};  // known stage cost
    double z_val{0.0};  // black-box stage cost
};

/// A realized rollout from x_S. `stage_costs` is aligned with `inputs`;
/// `cost_to_go` is aligned with `states` and holds suffix sums of h + zhat.
struct Trajectory {
    std::vector<State> states;
    std::vector<Input> inputs;
    std::vector<StageCostRecord> stage_costs;
    std::vector<double> cost_to_go;

    [[nodiscard]] int steps() const noexcept { return static_cast<int>(inputs.size()); }
    [[nodiscard]] int last_index() const noexcept { return static_cast<int>(states.size()) - 1; }
};

/// (x - x_F)' P (x - x_F) + u' R u
[[nodiscard]] double known_stage_cost_h(const State& x, const Input& u, const State& x_final, const CostWeights& w);

/// Same quadratic form referenced to the horizon's terminal state.
[[nodiscard]] double terminal_relative_stage_cost_ell(const State& x, const Input& u, const State& x_terminal,
                                                      const CostWeights& w);

/// -1/y for y < 0, kInfiniteCost otherwise.
[[nodiscard]] double barrier_transform(double y) noexcept;

/// Sum of h + zhat over the realized steps. Throws std::invalid_argument if the records are not aligned.
[[nodiscard]] double trajectory_overall_cost(const Trajectory& traj);

}  // namespace dmpc

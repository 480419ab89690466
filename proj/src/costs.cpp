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


#include "dmpc/costs.hpp"

#include <stdexcept>

namespace dmpc {

namespace {

double quadratic(const Eigen::VectorXd& d, const Eigen::VectorXd& w) {
    return (w.array() * d.array().square()).sum();
}

}  // namespace

void CostWeights::validate() const {
    if ((P.array() < 0.0).any() || (R.array() < 0.0).any()) {
        throw std::invalid_argument("CostWeights: diagonal entries must be >= 0");
    }
    if (P.size() == 0 || !(P.array() > 0.0).any()) {
        throw std::invalid_argument("CostWeights: P needs at least one strictly positive entry");
    }
}

double known_stage_cost_h(const State& x, const Input& u, const State& x_final, const CostWeights& w) {
    return terminal_relative_stage_cost_ell(x, u, x_final, w);
}

double terminal_relative_stage_cost_ell(const State& x, const Input& u, const State& x_terminal, const CostWeights& w) {
    if (x.size() != w.P.size() || x_terminal.size() != w.P.size() || u.size() != w.R.size()) {
        throw DimensionMismatch("stage cost: state/input size does not match weights");
    }
    return quadratic(x - x_terminal, w.P) + quadratic(u, w.R);
}

double barrier_transform(double y) noexcept {
    if (y < 0.0) return -1.0 / y;
    return kInfiniteCost;
}

double trajectory_overall_cost(const Trajectory& traj) {
    if (traj.stage_costs.size() != traj.inputs.size()) {
        throw std::invalid_argument("trajectory_overall_cost: stage cost records missing");
    }
    double total = 0.0;
    for (const auto& rec : traj.stage_costs) total += rec.h_val + rec.z_val;
    return total;
}

}  // namespace dmpc

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
#include <span>
#include <vector>

#include "dmpc/dmpc.hpp"

namespace dmpc::oracles {

struct QpSolution {
    std::vector<State> states;
    std::vector<Input> inputs;
    double cost{0.0};  // sum of the stage quadratic forms plus (N+1) q_term
};

/// Equality-constrained QP of a fixed-terminal problem on a linear model, solved with one dense KKT
/// system. Box bounds are ignored, so it is only an oracle when they are inactive.
[[nodiscard]] QpSolution fixed_terminal_kkt(const FixedTerminalProblem& problem);

/// min sum_{t<T} h(x_t, u_t) subject to the dynamics and x_T = x_F.
[[nodiscard]] QpSolution full_horizon_kkt(const SystemModel& model, const CostWeights& weights, const State& x_start,
                                          const State& x_final, int T);

struct EnumerationResult {
    int index{-1};
    HorizonPlan plan;
    int queries{0};
    int feasible{0};
};

/// Solves every candidate of the safe set (no pruning), queries the black box for every feasible
/// plan and returns the argmin of the overall cost, ties to the lowest index.
[[nodiscard]] EnumerationResult enumerate_terminal(const State& x_t, const SafeSet& ss, Predictor& pred,
                                                   const DmpcConfig& cfg, std::span<const Input> warm_inputs = {});

/// A small selection instance: double integrator, a feedback rollout of at most `max_candidates`
/// states as safe set, a random bump field and a query state near the rollout start.
struct LazyInstance {
    DmpcConfig cfg;
    Trajectory prev;
    State x_t;
    std::vector<GaussianBump> bumps;
};

[[nodiscard]] LazyInstance random_lazy_instance(std::uint64_t seed, int max_candidates = 12);

}  // namespace dmpc::oracles

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

#include <span>
#include <vector>

#include "dmpc/trajopt.hpp"

namespace dmpc {

enum class Execution { kSerial, kParallel };

/// One time step's worth of fixed-terminal solves: the current state against every safe-set candidate.
struct CandidateBatch {
    const SystemModel* model{nullptr};
    CostWeights weights;
    State x_t;
    int horizon{1};
    std::span<const State> targets;
    std::span<const double> q_terms;
    std::vector<char> skip;  // pruned candidates are not solved
    std::span<const Input> warm_inputs;
    SolverOptions options;
};

struct CandidateOutcome {
    bool pruned{false};
    SolveResult result;

    [[nodiscard]] bool feasible() const noexcept { return !pruned && result.feasible(); }
};

/// Reference kernel: candidates solved in index order on the calling thread.
[[nodiscard]] std::vector<CandidateOutcome> solve_candidates_serial(const CandidateBatch& batch);

/// OpenMP kernel. Each solve is independent and deterministic, so the output is identical to the
/// serial kernel's.
[[nodiscard]] std::vector<CandidateOutcome> solve_candidates_parallel(const CandidateBatch& batch);

[[nodiscard]] std::vector<CandidateOutcome> solve_candidates(const CandidateBatch& batch, Execution execution);

}  // namespace dmpc

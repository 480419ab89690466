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


#include <stdexcept>

#include "candidates_detail.hpp"

namespace dmpc {

namespace detail {

void validate_batch(const CandidateBatch& batch) {
    if (batch.model == nullptr) throw std::invalid_argument("CandidateBatch: model is null");
    if (batch.targets.size() != batch.q_terms.size()) {
        throw DimensionMismatch("CandidateBatch: targets and q_terms differ in length");
    }
    if (!batch.skip.empty() && batch.skip.size() != batch.targets.size()) {
        throw DimensionMismatch("CandidateBatch: skip mask differs in length");
    }
}

CandidateOutcome solve_one(const CandidateBatch& batch, std::size_t r) {
    CandidateOutcome out;
    if (!batch.skip.empty() && batch.skip[r] != 0) {
        out.pruned = true;
        return out;
    }
    FixedTerminalProblem problem{batch.x_t, batch.targets[r], batch.horizon, batch.model, batch.weights,
                                 batch.q_terms[r]};
    out.result = solve_fixed_terminal(problem, batch.warm_inputs, batch.options);
    out.result.plan.terminal_index = static_cast<int>(r);
    return out;
}

}  // namespace detail

std::vector<CandidateOutcome> solve_candidates_serial(const CandidateBatch& batch) {
    detail::validate_batch(batch);
    std::vector<CandidateOutcome> out(batch.targets.size());
    for (std::size_t r = 0; r < batch.targets.size(); ++r) out[r] = detail::solve_one(batch, r);
    return out;
}

std::vector<CandidateOutcome> solve_candidates(const CandidateBatch& batch, Execution execution) {
    return execution == Execution::kSerial ? solve_candidates_serial(batch) : solve_candidates_parallel(batch);
}

}  // namespace dmpc

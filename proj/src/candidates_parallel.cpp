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


#include <exception>

#include <omp.h>

#include "candidates_detail.hpp"

namespace dmpc {

std::vector<CandidateOutcome> solve_candidates_parallel(const CandidateBatch& batch) {
    detail::validate_batch(batch);
    const auto count = static_cast<long>(batch.targets.size());
    std::vector<CandidateOutcome> out(batch.targets.size());
    std::exception_ptr error;

    // Solve times vary a lot (infeasible targets exhaust the budget), hence dynamic scheduling.
#pragma omp parallel for schedule(dynamic, 1)
    for (long r = 0; r < count; ++r) {
        try {
            out[static_cast<std::size_t>(r)] = detail::solve_one(batch, static_cast<std::size_t>(r));
        } catch (...) {
#pragma omp critical(dmpc_candidate_error)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    return out;
}

}  // namespace dmpc

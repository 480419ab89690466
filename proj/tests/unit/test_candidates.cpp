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


#include <gtest/gtest.h>

#include "dmpc/candidates.hpp"
#include "dmpc/dmpc.hpp"
#include "dmpc/oracles.hpp"

namespace dmpc {
namespace {

TEST(Candidates, SerialAndParallelKernelsAgree) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const auto inst = oracles::random_lazy_instance(seed);
        const SafeSet ss = build_safe_set(inst.prev, inst.cfg.x_final);
        CandidateBatch batch;
        batch.model = &inst.cfg.model;
        batch.weights = inst.cfg.weights;
        batch.x_t = inst.x_t;
        batch.horizon = inst.cfg.horizon;
        batch.targets = ss.candidates;
        batch.q_terms = ss.base_cost_to_go;
        batch.skip.assign(ss.candidates.size(), 0);
        batch.skip[1] = 1;
        const auto serial = solve_candidates_serial(batch);
        const auto parallel = solve_candidates_parallel(batch);
        ASSERT_EQ(serial.size(), parallel.size());
        EXPECT_TRUE(serial[1].pruned);
        EXPECT_FALSE(serial[1].feasible());
        for (std::size_t r = 0; r < serial.size(); ++r) {
            EXPECT_EQ(serial[r].pruned, parallel[r].pruned);
            EXPECT_EQ(serial[r].feasible(), parallel[r].feasible());
            EXPECT_EQ(serial[r].result.plan.J_model, parallel[r].result.plan.J_model);
            EXPECT_EQ(serial[r].result.plan.inputs, parallel[r].result.plan.inputs);
        }
    }
}

TEST(Candidates, EmptyBatch) {
    const SystemModel m = make_double_integrator(1, 0.5);
    CandidateBatch batch;
    batch.model = &m;
    batch.weights = {Eigen::Vector2d::Ones(), Eigen::VectorXd::Ones(1)};
    batch.x_t = Eigen::Vector2d::Zero();
    EXPECT_TRUE(solve_candidates(batch, Execution::kParallel).empty());
}

}  // namespace
}  // namespace dmpc

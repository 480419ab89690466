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


#include <benchmark/benchmark.h>

#include "dmpc/candidates.hpp"
#include "dmpc/dmpc.hpp"
#include "dmpc/harness.hpp"

namespace {

using namespace dmpc;

// One time step of the bicycle benchmark: x_S against every state of the initial trajectory.
struct BicycleStep {
    DmpcConfig cfg;
    SafeSet ss;
    std::vector<Input> warm;

    BicycleStep() {
        const harness::ExperimentConfig exp = harness::bicycle_benchmark();
        auto pred = harness::build_predictor(exp.predictor, exp.seed);
        const Trajectory init = harness::generate_initial_trajectory(exp, *pred);
        cfg = harness::build_dmpc_config(exp);
        ss = build_safe_set(init, cfg.x_final);
        warm.assign(init.inputs.begin(), init.inputs.begin() + cfg.horizon);
    }

    [[nodiscard]] CandidateBatch batch(bool prune) const {
        CandidateBatch b;
        b.model = &cfg.model;
        b.weights = cfg.weights;
        b.x_t = cfg.x_start;
        b.horizon = cfg.horizon;
        b.targets = ss.candidates;
        b.q_terms = ss.base_cost_to_go;
        b.warm_inputs = warm;
        b.options = cfg.solver;
        b.skip.assign(ss.candidates.size(), 0);
        if (prune) {
            for (int r = 0; r < ss.size(); ++r) {
                b.skip[r] = trivially_unreachable(cfg.model, cfg.x_start, ss.candidates[r], cfg.horizon, 1.0);
            }
        }
        return b;
    }
};

const BicycleStep& fixture() {
    static const BicycleStep f;
    return f;
}

void BM_CandidatesSerial(benchmark::State& state) {
    const CandidateBatch b = fixture().batch(state.range(0) != 0);
    for (auto _ : state) benchmark::DoNotOptimize(solve_candidates_serial(b));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b.targets.size()));
}

void BM_CandidatesParallel(benchmark::State& state) {
    const CandidateBatch b = fixture().batch(state.range(0) != 0);
    for (auto _ : state) benchmark::DoNotOptimize(solve_candidates_parallel(b));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b.targets.size()));
}

}  // namespace

BENCHMARK(BM_CandidatesSerial)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_CandidatesParallel)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();

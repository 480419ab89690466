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


#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "dmpc/harness.hpp"
#include "dmpc/oracles.hpp"

namespace {

using namespace dmpc;

int cmd_run(const std::string& config_path, const std::string& out_dir, std::optional<std::uint64_t> seed,
            std::optional<int> max_iters) {
    harness::ExperimentConfig cfg = harness::load_config(config_path);
    cfg.output_dir = out_dir;
    if (seed) cfg.seed = *seed;
    if (max_iters) cfg.max_iterations = *max_iters;
    const auto art = harness::run_experiment(cfg);
    const auto& rep = art.result.report;
    for (const auto& it : rep.iterations) {
        std::printf("iter %2d  cost %.9f  steps %3d  samples %6llu  delta %.3e\n", it.iteration, it.overall_cost,
                    it.steps, static_cast<unsigned long long>(it.blackbox_samples), it.delta_to_prev);
    }
    std::printf("converged: %s  iterations: %zu  monotonicity violations: %d\n", rep.converged ? "yes" : "no",
                rep.iterations.size() - 1, rep.monotonicity_violations);
    std::printf("black-box samples: %llu (initial trajectory %llu)  full-enumeration baseline: %llu\n",
                static_cast<unsigned long long>(rep.total_blackbox_samples + art.initial_samples),
                static_cast<unsigned long long>(art.initial_samples),
                static_cast<unsigned long long>(rep.total_enumeration_samples + art.initial_samples));
    return rep.converged ? 0 : 2;
}

int cmd_verify(const std::string& out_dir) {
    const auto rep = harness::verify_artifacts(out_dir);
    std::printf("iterations: %d  max replay error: %.3e  max cost-to-go error: %.3e\n", rep.iterations,
                rep.max_replay_error, rep.max_cost_to_go_error);
    for (const auto& f : rep.failures) std::printf("FAIL %s\n", f.c_str());
    std::printf("%s\n", rep.ok ? "OK" : "INVALID");
    return rep.ok ? 0 : 1;
}

int cmd_oracle(const std::string& config_path) {
    const harness::ExperimentConfig cfg = harness::load_config(config_path);
    const DmpcConfig dcfg = harness::build_dmpc_config(cfg);
    auto pred = harness::build_predictor(cfg.predictor, cfg.seed);
    const Trajectory initial = harness::generate_initial_trajectory(cfg, *pred);

    // Lazy selection against full enumeration at every state of the initial trajectory.
    SafeSet ss = build_safe_set(initial, dcfg.x_final);
    int agree = 0;
    int total = 0;
    int lazy_queries = 0;
    int enum_queries = 0;
    for (int t = 0; t < initial.steps(); ++t) {
        const std::span<const Input> warm(initial.inputs.data() + t,
                                          std::min<std::size_t>(dcfg.horizon, initial.inputs.size() - t));
        const auto oracle = oracles::enumerate_terminal(initial.states[t], ss, *pred, dcfg, warm);
        if (oracle.index < 0) continue;
        const HorizonPlan lazy = select_terminal_lazy(initial.states[t], ss, *pred, dcfg, warm);
        ++total;
        agree += lazy.terminal_index == oracle.index;
        lazy_queries += static_cast<int>(ss.visited.size());
        enum_queries += oracle.queries;
    }
    std::printf("lazy selection matches enumeration at %d/%d states (queries %d vs %d)\n", agree, total, lazy_queries,
                enum_queries);

    if (dcfg.model.is_linear() && cfg.predictor.kind == harness::PredictorKind::kZero) {
        const DmpcConfig run_cfg = dcfg;
        ZeroPredictor zero;
        const RunResult res = run(initial, zero, run_cfg);
        const double dmpc_cost = res.report.iterations.back().overall_cost;
        const int T = std::max(80, 2 * res.trajectories.back().steps());
        const auto qp = oracles::full_horizon_kkt(dcfg.model, dcfg.weights, dcfg.x_start, dcfg.x_final, T);
        std::printf("full-horizon KKT cost (T=%d): %.9f  DMPC cost: %.9f  relative gap: %.3e\n", T, qp.cost, dmpc_cost,
                    (dmpc_cost - qp.cost) / qp.cost);
    }
    return agree == total ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    dmpc::harness::configure_logging();
    CLI::App app{"Data-and-model-driven predictive control experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> max_iters;
    auto* run = app.add_subcommand("run", "Run an experiment and write its artifacts");
    run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory")->required();
    run->add_option("--seed", seed, "Random seed override");
    run->add_option("--max-iters", max_iters, "Iteration cap override")->check(CLI::PositiveNumber);

    std::string verify_dir;
    auto* verify = app.add_subcommand("verify", "Replay logged trajectories and check invariants");
    verify->add_option("--out", verify_dir, "Artifact directory")->required()->check(CLI::ExistingDirectory);

    std::string oracle_config;
    auto* oracle = app.add_subcommand("oracle", "Compare against the enumeration and KKT oracles");
    oracle->add_option("--config", oracle_config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(config_path, out_dir, seed, max_iters);
        if (*verify) return cmd_verify(verify_dir);
        if (*oracle) return cmd_oracle(oracle_config);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

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


// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any line fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "dmpc/harness.hpp"
#include "dmpc/oracles.hpp"

namespace {

using namespace dmpc;
namespace fs = std::filesystem;

int g_failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
    if (!ok) ++g_failures;
    std::printf("%s  %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void bicycle_benchmark() {
    harness::ExperimentConfig cfg = harness::bicycle_benchmark();
    cfg.output_dir = fs::temp_directory_path() / "dmpc_acceptance_bicycle";
    fs::remove_all(cfg.output_dir);
    const auto t0 = std::chrono::steady_clock::now();
    const harness::RunArtifacts art = harness::run_experiment(cfg);
    const double wall = seconds_since(t0);
    const ConvergenceReport& rep = art.result.report;
    const int iters = static_cast<int>(rep.iterations.size()) - 1;

    double worst_increase = 0.0;
    for (std::size_t j = 1; j < rep.iterations.size(); ++j) {
        worst_increase = std::max(worst_increase, rep.iterations[j].overall_cost - rep.iterations[j - 1].overall_cost);
    }
    report(rep.converged && iters <= 10, "bicycle benchmark convergence",
           fmt("converged=%s after %d iterations (limit 10), final delta %.3e", rep.converged ? "yes" : "no", iters,
               rep.iterations.back().delta_to_prev));
    report(rep.monotonicity_violations == 0, "bicycle benchmark cost monotonicity",
           fmt("%d increases beyond 1e-6, largest %+.6e (costs %.6f -> %.6f)", rep.monotonicity_violations,
               worst_increase, rep.iterations[1].overall_cost, rep.iterations.back().overall_cost));
    report(wall < 300.0, "bicycle benchmark wall clock", fmt("%.1f s (limit 300 s)", wall));

    const std::uint64_t used = rep.total_blackbox_samples + art.initial_samples;
    const std::uint64_t baseline = rep.total_enumeration_samples + art.initial_samples;
    report(used < baseline, "sample efficiency",
           fmt("%llu black-box samples (initial trajectory %llu) vs full-enumeration baseline %llu",
               static_cast<unsigned long long>(used), static_cast<unsigned long long>(art.initial_samples),
               static_cast<unsigned long long>(baseline)));

    const harness::VerifyReport vr = harness::verify_artifacts(art.directory);
    report(vr.max_replay_error <= 1e-9 && vr.max_cost_to_go_error == 0.0, "trajectory replay",
           fmt("%d logged iterations, max replay error %.3e, max cost-to-go recursion error %.3e", vr.iterations,
               vr.max_replay_error, vr.max_cost_to_go_error));
    fs::remove_all(cfg.output_dir);
}

void randomized_double_integrator_suites() {
    int monotone_runs = 0;
    int violations = 0;
    double worst_increase = 0.0;
    int feasible_runs = 0;
    std::string failures;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const harness::ExperimentConfig cfg = harness::random_double_integrator(seed);
        try {
            const harness::RunArtifacts art = harness::run_experiment(cfg);
            const ConvergenceReport& rep = art.result.report;
            violations += rep.monotonicity_violations;
            if (rep.monotonicity_violations == 0) ++monotone_runs;
            for (std::size_t j = 1; j < rep.iterations.size(); ++j) {
                worst_increase =
                    std::max(worst_increase, rep.iterations[j].overall_cost - rep.iterations[j - 1].overall_cost);
            }
            // Every step after the first must have had at least one reachable terminal candidate.
            bool ok = true;
            for (std::size_t j = 1; j < art.result.step_logs.size(); ++j) {
                for (const StepLog& log : art.result.step_logs[j]) {
                    if (log.t > 0 && log.feasible_candidates == 0) ok = false;
                }
            }
            if (ok) {
                ++feasible_runs;
            } else {
                failures += fmt(" seed %llu: empty candidate set;", static_cast<unsigned long long>(seed));
            }
        } catch (const std::exception& e) {
            failures += fmt(" seed %llu: %s;", static_cast<unsigned long long>(seed), e.what());
        }
    }
    report(violations == 0, "iteration cost monotonicity suite",
           fmt("%d/20 runs monotone, %d increases beyond 1e-6, largest %+.6e", monotone_runs, violations,
               worst_increase));
    report(feasible_runs == 20, "recursive feasibility suite",
           fmt("%d/20 runs reached the x_F ball in every iteration with a reachable candidate at every step%s",
               feasible_runs, failures.c_str()));
}

void oracle_equivalence() {
    int converged = 0;
    int within = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        harness::ExperimentConfig cfg = harness::random_double_integrator(seed);
        cfg.predictor = harness::PredictorSpec{};
        cfg.P = Eigen::Vector4d::Ones();
        cfg.R = Eigen::Vector2d::Constant(0.01);
        cfg.model.input_limit = kInfiniteCost;
        cfg.horizon = 12;
        cfg.equilibrium_tolerance = 1e-3;
        cfg.max_iterations = 20;
        const harness::RunArtifacts art = harness::run_experiment(cfg);
        const Trajectory& last = art.result.trajectories.back();
        const DmpcConfig dcfg = harness::build_dmpc_config(cfg);
        const int T = std::max(80, 2 * last.steps());
        const auto qp = oracles::full_horizon_kkt(dcfg.model, dcfg.weights, dcfg.x_start, dcfg.x_final, T);
        const double gap = std::abs(trajectory_overall_cost(last) - qp.cost) / qp.cost;
        worst = std::max(worst, gap);
        if (art.result.report.converged) ++converged;
        if (art.result.report.converged && gap <= 0.02) ++within;
    }
    report(within == 10, "zero black-box oracle equivalence",
           fmt("%d/10 runs converged within 20 iterations, %d/10 converged within 2%% of the full-horizon KKT cost, "
               "worst final gap %.3f%%",
               converged, within, 100 * worst));
}

void lazy_loop() {
    int correct = 0;
    int fewer = 0;
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        const oracles::LazyInstance inst = oracles::random_lazy_instance(seed, 12);
        GaussianBumpField lazy_pred(inst.bumps);
        GaussianBumpField full_pred(inst.bumps);
        SafeSet ss = build_safe_set(inst.prev, inst.cfg.x_final);
        const HorizonPlan plan = select_terminal_lazy(inst.x_t, ss, lazy_pred, inst.cfg);
        const auto ref =
            oracles::enumerate_terminal(inst.x_t, build_safe_set(inst.prev, inst.cfg.x_final), full_pred, inst.cfg);
        if (plan.terminal_index == ref.index) ++correct;
        if (lazy_pred.query_count() < full_pred.query_count()) ++fewer;
    }
    report(correct == 25 && fewer >= 20, "lazy terminal selection",
           fmt("argmin matches enumeration in %d/25, strictly fewer queries in %d/25 (need 25 and 20)", correct,
               fewer));
}

void unit_level() {
    const bool barrier = barrier_transform(-1.0) == 1.0 && barrier_transform(-2.0) == 0.5 &&
                         std::isinf(barrier_transform(0.0)) && std::isinf(barrier_transform(1.0));
    report(barrier, "barrier transform", "-1 -> 1, -2 -> 0.5, 0 and 1 -> infinite sentinel");

    Trajectory t;
    t.states.assign(3, State::Zero(1));
    t.inputs.assign(2, Input::Zero(1));
    t.stage_costs = {{1.0, 0.5}, {2.0, 0.5}};
    t = compute_cost_to_go(t);
    const bool ctg = t.cost_to_go == std::vector<double>{4.0, 2.5, 0.0};
    report(ctg, "cost-to-go recursion", fmt("[%.17g, %.17g, %.17g] (expected [4, 2.5, 0])", t.cost_to_go[0],
                                            t.cost_to_go[1], t.cost_to_go[2]));

    int ok = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> N01;
        const int n = 2 + static_cast<int>(seed % 3);
        const int m = 1 + static_cast<int>(seed % 2);
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
        Eigen::MatrixXd B(n, m);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) A(i, j) += 0.2 * N01(rng);
            for (int j = 0; j < m; ++j) B(i, j) = N01(rng);
        }
        const SystemModel model = make_linear_model(A, B, 0.5);
        FixedTerminalProblem p;
        p.model = &model;
        p.x0 = Eigen::VectorXd::NullaryExpr(n, [&] { return 3.0 * N01(rng); });
        p.terminal = Eigen::VectorXd::NullaryExpr(n, [&] { return 3.0 * N01(rng); });
        p.horizon = 4 + static_cast<int>(seed % 7);
        p.weights = {Eigen::VectorXd::Ones(n), Eigen::VectorXd::Constant(m, 0.01)};
        p.q_term = std::abs(N01(rng));
        const SolveResult r = solve_fixed_terminal(p);
        const auto ref = oracles::fixed_terminal_kkt(p);
        const double err = std::abs(r.plan.J_model - ref.cost) / std::abs(ref.cost);
        worst = std::max(worst, err);
        if (r.feasible() && err <= 1e-4) ++ok;
    }
    report(ok == 20, "fixed-terminal solver vs KKT oracle",
           fmt("%d/20 linear instances within 1e-4 relative, worst %.3e", ok, worst));
}

}  // namespace

int main() {
    harness::configure_logging();
    const auto t0 = std::chrono::steady_clock::now();
    unit_level();
    lazy_loop();
    oracle_equivalence();
    randomized_double_integrator_suites();
    bicycle_benchmark();
    std::printf("%d failing criteria, %.1f s\n", g_failures, seconds_since(t0));
    return g_failures == 0 ? 0 : 1;
}

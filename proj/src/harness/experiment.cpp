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


#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "dmpc/harness.hpp"

namespace dmpc::harness {

using nlohmann::json;

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double to_double(const std::string& s) {
    if (s.empty()) return 0.0;
    if (s == "inf") return kInfiniteCost;
    return std::stod(s);
}

}  // namespace

void configure_logging() {
    const char* env = std::getenv("DMPC_LOG");
    spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

void write_trajectories_csv(const std::filesystem::path& path, const SystemModel& model, const RunResult& result) {
    std::ostringstream out;
    out << "iter,t";
    for (int i = 0; i < model.n; ++i) out << ",x" << i;
    for (int i = 0; i < model.m; ++i) out << ",u" << i;
    out << ",h,zhat,q,terminal_index,plan_source\n";
    for (std::size_t j = 0; j < result.trajectories.size(); ++j) {
        const Trajectory& traj = result.trajectories[j];
        const auto& logs = result.step_logs[j];
        for (int t = 0; t <= traj.steps(); ++t) {
            out << j << ',' << t;
            for (int i = 0; i < model.n; ++i) out << ',' << fmt17(traj.states[t](i));
            const bool has_input = t < traj.steps();
            for (int i = 0; i < model.m; ++i) out << ',' << (has_input ? fmt17(traj.inputs[t](i)) : "");
            if (has_input) {
                out << ',' << fmt17(traj.stage_costs[t].h_val) << ',' << fmt17(traj.stage_costs[t].z_val);
            } else {
                out << ",,";
            }
            out << ',' << fmt17(traj.cost_to_go[t]);
            if (has_input && t < static_cast<int>(logs.size())) {
                out << ',' << logs[t].terminal_index << ',' << to_string(logs[t].source);
            } else {
                out << ",-1,";
            }
            out << '\n';
        }
    }
    write_text(path, out.str());
}

json metrics_json(const ExperimentConfig& cfg, const RunResult& result, std::uint64_t initial_samples) {
    json iterations = json::array();
    for (const auto& rep : result.report.iterations) {
        iterations.push_back({{"iteration", rep.iteration},
                              {"overall_cost", rep.overall_cost},
                              {"steps", rep.steps},
                              {"blackbox_queries", rep.blackbox_queries},
                              {"blackbox_samples", rep.iteration == 0 ? initial_samples : rep.blackbox_samples},
                              {"enumeration_samples", rep.enumeration_samples},
                              {"converged", rep.converged},
                              {"delta_to_prev", number_or_null(rep.delta_to_prev)},
                              {"monotone", rep.monotone},
                              {"descent_violations", rep.descent_violations}});
    }
    const auto& r = result.report;
    return {{"scenario", cfg.scenario},
            {"converged", r.converged},
            {"iterations_run", static_cast<int>(r.iterations.size()) - 1},
            {"monotonicity_violations", r.monotonicity_violations},
            {"descent_violations", r.descent_violations},
            {"total_blackbox_samples", r.total_blackbox_samples + initial_samples},
            {"total_enumeration_samples", r.total_enumeration_samples + initial_samples},
            {"iterations", iterations}};
}

RunArtifacts run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const DmpcConfig dcfg = build_dmpc_config(cfg);
    auto pred = build_predictor(cfg.predictor, cfg.seed);

    RunArtifacts art;
    art.directory = cfg.output_dir;
    Trajectory initial = generate_initial_trajectory(cfg, *pred);
    art.initial_samples = pred->sample_count();
    pred->reset_counters();
    spdlog::info("{}: initial trajectory has {} steps, cost {:.6f}", cfg.scenario, initial.steps(),
                 trajectory_overall_cost(initial));

    try {
        art.result = run(initial, *pred, dcfg, [&cfg](const IterationReport& rep) {
            spdlog::info("{}: iteration {} cost {:.9f} steps {} samples {} delta {:.3e}", cfg.scenario, rep.iteration,
                         rep.overall_cost, rep.steps, rep.blackbox_samples, rep.delta_to_prev);
        });
    } catch (const std::exception& e) {
        throw std::runtime_error(cfg.scenario + ": " + e.what());
    }

    if (!art.directory.empty()) {
        std::filesystem::create_directories(art.directory);
        write_text(art.directory / "config.json", to_json(cfg).dump(2) + "\n");
        write_trajectories_csv(art.directory / "trajectories.csv", dcfg.model, art.result);
        write_text(art.directory / "metrics.json", metrics_json(cfg, art.result, art.initial_samples).dump(2) + "\n");
    }
    return art;
}

std::vector<std::vector<LoggedRow>> read_trajectories_csv(const std::filesystem::path& path, int n, int m) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    const std::size_t width = 2 + static_cast<std::size_t>(n + m) + 5;
    if (split(line).size() != width) throw std::runtime_error(path.string() + ": header does not match the model");

    std::vector<std::vector<LoggedRow>> iterations;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != width) throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": bad row");
        LoggedRow row;
        try {
            row.iter = std::stoi(cells[0]);
            row.t = std::stoi(cells[1]);
            row.x.resize(n);
            for (int i = 0; i < n; ++i) row.x(i) = to_double(cells[2 + i]);
            if (!cells[2 + n].empty()) {
                row.u = Input(m);
                for (int i = 0; i < m; ++i) (*row.u)(i) = to_double(cells[2 + n + i]);
            }
            const std::size_t c = 2 + static_cast<std::size_t>(n + m);
            row.h = to_double(cells[c]);
            row.zhat = to_double(cells[c + 1]);
            row.q = to_double(cells[c + 2]);
            row.terminal_index = std::stoi(cells[c + 3]);
            row.plan_source = cells[c + 4];
        } catch (const std::logic_error&) {
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": unparsable value");
        }
        if (row.iter < 0) throw std::runtime_error(path.string() + ": negative iteration");
        if (static_cast<std::size_t>(row.iter) >= iterations.size()) iterations.resize(row.iter + 1);
        iterations[row.iter].push_back(std::move(row));
    }
    return iterations;
}

Trajectory trajectory_from_rows(const std::vector<LoggedRow>& rows) {
    Trajectory traj;
    for (const auto& row : rows) {
        traj.states.push_back(row.x);
        traj.cost_to_go.push_back(row.q);
        if (row.u) {
            traj.inputs.push_back(*row.u);
            traj.stage_costs.push_back({row.h, row.zhat});
        }
    }
    if (traj.states.size() != traj.inputs.size() + 1) throw std::runtime_error("logged trajectory is not aligned");
    return traj;
}

VerifyReport verify_artifacts(const std::filesystem::path& directory) {
    VerifyReport rep;
    auto fail = [&rep](std::string msg) {
        rep.ok = false;
        rep.failures.push_back(std::move(msg));
    };

    ExperimentConfig cfg = load_config(directory / "config.json");
    const DmpcConfig dcfg = build_dmpc_config(cfg);
    const SystemModel& model = dcfg.model;
    const auto iterations = read_trajectories_csv(directory / "trajectories.csv", model.n, model.m);
    std::ifstream metrics_in(directory / "metrics.json");
    if (!metrics_in) throw std::runtime_error("cannot open " + (directory / "metrics.json").string());
    const json metrics = json::parse(metrics_in);
    const json& mit = metrics.at("iterations");
    if (mit.size() != iterations.size()) fail("metrics and trajectory log disagree on the iteration count");

    double prev_cost = kInfiniteCost;
    for (std::size_t j = 0; j < iterations.size(); ++j) {
        const std::string tag = "iteration " + std::to_string(j);
        Trajectory traj;
        try {
            traj = trajectory_from_rows(iterations[j]);
        } catch (const std::exception& e) {
            fail(tag + ": " + e.what());
            continue;
        }
        ++rep.iterations;
        if ((traj.states.front() - cfg.x_start).cwiseAbs().maxCoeff() > 1e-9) fail(tag + ": does not start at x_S");

        State x = traj.states.front();
        for (int t = 0; t < traj.steps(); ++t) {
            x = step(model, x, traj.inputs[t]);
            const double err = (x - traj.states[t + 1]).cwiseAbs().maxCoeff();
            rep.max_replay_error = std::max(rep.max_replay_error, err);
            if (err > 1e-9) {
                fail(tag + ": replay error " + fmt17(err) + " at t=" + std::to_string(t + 1));
                break;
            }
        }
        HorizonPlan as_plan;
        as_plan.states = traj.states;
        as_plan.inputs = traj.inputs;
        if (bound_violation(model, as_plan) > 1e-9) fail(tag + ": bounds violated");
        if (!is_at_equilibrium(model, traj.states.back(), cfg.x_final, cfg.P, cfg.equilibrium_tolerance)) {
            fail(tag + ": final state outside the x_F ball");
        }

        double q = 0.0;
        for (int t = traj.steps(); t >= 0; --t) {
            if (t < traj.steps()) q += traj.stage_costs[t].h_val + traj.stage_costs[t].z_val;
            const double err = std::abs(q - traj.cost_to_go[t]);
            rep.max_cost_to_go_error = std::max(rep.max_cost_to_go_error, err / std::max(1.0, std::abs(q)));
        }
        if (rep.max_cost_to_go_error > 1e-12) fail(tag + ": cost-to-go column does not match the stage costs");

        if (j < mit.size()) {
            const double logged = mit[j].at("overall_cost").get<double>();
            if (std::abs(logged - q) > 1e-9 * std::max(1.0, std::abs(q))) fail(tag + ": metrics overall_cost mismatch");
            if (mit[j].at("steps").get<int>() != traj.steps()) fail(tag + ": metrics step count mismatch");
        }
        if (q > prev_cost + dcfg.monotonicity_tolerance) fail(tag + ": overall cost increased");
        prev_cost = q;
    }
    return rep;
}

}  // namespace dmpc::harness

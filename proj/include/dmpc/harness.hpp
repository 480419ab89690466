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
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dmpc/blackbox.hpp"
#include "dmpc/dmpc.hpp"

namespace dmpc::harness {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// The tracking policy did not bring the system into the x_F ball within the step cap.
class InitialTrajectoryFailed : public std::runtime_error {
public:
    explicit InitialTrajectoryFailed(const std::string& what) : std::runtime_error(what) {}
};

enum class ModelKind { kBicycle, kDoubleIntegrator, kLinear };

struct ModelSpec {
    ModelKind kind{ModelKind::kBicycle};
    double dt{0.5};
    BicycleParams bicycle;
    int dims{2};                     // double integrator
    double input_limit{kInfiniteCost};  // double integrator, |u_i| bound
    Eigen::MatrixXd A;               // linear
    Eigen::MatrixXd B;
};

/// "random_bumps" draws `random_bump_count` bumps from the run seed inside the given box.
enum class PredictorKind { kZero, kGaussianBumps, kRandomBumps, kRegions };

struct PredictorSpec {
    PredictorKind kind{PredictorKind::kZero};
    int index_x{0};
    int index_y{1};
    std::vector<GaussianBump> bumps;
    std::optional<ExponentialBaseline> baseline;
    std::vector<PenaltyRegion> regions;
    int random_bump_count{3};
    Eigen::Vector2d random_box_lo{Eigen::Vector2d::Zero()};
    Eigen::Vector2d random_box_hi{Eigen::Vector2d::Zero()};
    double random_amplitude_lo{1.0};
    double random_amplitude_hi{5.0};
    double random_length_lo{1.0};
    double random_length_hi{3.0};
};

struct InitialTrajectorySpec {
    bool from_file{false};
    std::filesystem::path path;  // trajectories.csv layout, iteration 0 is read
    int max_steps{400};
    // bicycle: pure pursuit through the waypoints, then a fixed-terminal capture solve
    std::vector<Eigen::Vector2d> waypoints;
    double lookahead{4.0};
    double cruise_speed{2.0};
    double speed_gain{1.0};
    double capture_distance{6.0};
    // double integrator: u = sat(kp (p_F - p) - kd (v - v_F)); generic linear: u = sat(-K (x - x_F)), K from LQR
    double kp{0.4};
    double kd{1.2};
};

struct ExperimentConfig {
    std::string scenario{"custom"};
    ModelSpec model;
    Eigen::VectorXd P;
    Eigen::VectorXd R;
    State x_start;
    State x_final;
    int horizon{12};
    double epsilon{1e-4};
    double equilibrium_tolerance{0.15};
    int max_steps_per_iteration{200};
    int max_iterations{10};
    double pruning_radius_factor{1.0};
    bool repredict_shifted{false};
    bool parallel{true};
    PredictorSpec predictor;
    InitialTrajectorySpec initial;
    std::filesystem::path output_dir{"out"};
    std::uint64_t seed{0};

    /// Throws ConfigError on a broken invariant (dimension mismatch, missing initial-trajectory file, ...).
    void validate() const;
};

[[nodiscard]] ExperimentConfig parse_config(const nlohmann::json& doc);
[[nodiscard]] nlohmann::json to_json(const ExperimentConfig& cfg);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

[[nodiscard]] SystemModel build_model(const ModelSpec& spec);
[[nodiscard]] std::unique_ptr<Predictor> build_predictor(const PredictorSpec& spec, std::uint64_t seed);
[[nodiscard]] DmpcConfig build_dmpc_config(const ExperimentConfig& cfg);

/// A feasible rollout from x_S into the x_F ball. The black box is queried once for the whole
/// rollout to fill in the zhat records.
[[nodiscard]] Trajectory generate_initial_trajectory(const ExperimentConfig& cfg, Predictor& pred);

/// The bicycle benchmark scenario with the shipped bump field.
[[nodiscard]] ExperimentConfig bicycle_benchmark();

/// Planar double integrator with random start, random bump field and a random feedback initializer.
[[nodiscard]] ExperimentConfig random_double_integrator(std::uint64_t seed);

struct RunArtifacts {
    std::filesystem::path directory;
    RunResult result;
    std::uint64_t initial_samples{0};
};

/// Builds everything from `cfg`, runs the engine and writes config.json, trajectories.csv and
/// metrics.json into cfg.output_dir (skipped when the directory is empty).
[[nodiscard]] RunArtifacts run_experiment(const ExperimentConfig& cfg);

void write_trajectories_csv(const std::filesystem::path& path, const SystemModel& model, const RunResult& result);
[[nodiscard]] nlohmann::json metrics_json(const ExperimentConfig& cfg, const RunResult& result,
                                          std::uint64_t initial_samples);

struct LoggedRow {
    int iter{0};
    int t{0};
    State x;
    std::optional<Input> u;
    double h{0.0};
    double zhat{0.0};
    double q{0.0};
    int terminal_index{-1};
    std::string plan_source;
};

/// Parses trajectories.csv; rows grouped by iteration.
[[nodiscard]] std::vector<std::vector<LoggedRow>> read_trajectories_csv(const std::filesystem::path& path, int n,
                                                                        int m);

/// Rebuilds iteration `iter` of a log as a Trajectory (used for file-based initial trajectories).
[[nodiscard]] Trajectory trajectory_from_rows(const std::vector<LoggedRow>& rows);

struct VerifyReport {
    bool ok{true};
    int iterations{0};
    double max_replay_error{0.0};
    double max_cost_to_go_error{0.0};
    std::vector<std::string> failures;
};

/// Replays every logged iteration through the dynamics and checks the logged invariants:
/// states within 1e-9, bounds, cost-to-go recursion, final state in the x_F ball, metrics consistency.
[[nodiscard]] VerifyReport verify_artifacts(const std::filesystem::path& directory);

/// Reads DMPC_LOG (trace, debug, info, warn, error, off) and sets the global log level.
void configure_logging();

}  // namespace dmpc::harness

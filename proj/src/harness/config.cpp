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
#include <fstream>
#include <random>
#include <set>

#include "dmpc/harness.hpp"

namespace dmpc::harness {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("field '") + key + "': " + e.what());
    }
}

Eigen::VectorXd vector_from(const json& j, const std::string& what) {
    if (!j.is_array()) throw ConfigError(what + ": expected an array of numbers");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(what + ": expected an array of numbers");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

json vector_to(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Eigen::MatrixXd matrix_from(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected a non-empty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        Eigen::VectorXd row = vector_from(j[r], what);
        if (row.size() != cols) throw ConfigError(what + ": ragged matrix");
        M.row(r) = row.transpose();
    }
    return M;
}

json matrix_to(const Eigen::MatrixXd& M) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < M.rows(); ++r) rows.push_back(vector_to(M.row(r).transpose()));
    return rows;
}

Eigen::Vector2d point_from(const json& j, const std::string& what) {
    Eigen::VectorXd v = vector_from(j, what);
    if (v.size() != 2) throw ConfigError(what + ": expected [x, y]");
    return v;
}

json point_to(const Eigen::Vector2d& p) { return json::array({p.x(), p.y()}); }

// JSON has no infinity; an absent or null bound means unbounded.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

ModelSpec parse_model(const json& j) {
    ModelSpec spec;
    const auto type = get_or<std::string>(j, "type", "");
    spec.dt = get_or(j, "dt", 0.5);
    if (type == "bicycle") {
        check_keys(j, {"type", "dt", "l_f", "l_r"}, "model");
        spec.kind = ModelKind::kBicycle;
        spec.bicycle.l_f = get_or(j, "l_f", spec.bicycle.l_f);
        spec.bicycle.l_r = get_or(j, "l_r", spec.bicycle.l_r);
    } else if (type == "double_integrator") {
        check_keys(j, {"type", "dt", "dims", "input_limit"}, "model");
        spec.kind = ModelKind::kDoubleIntegrator;
        spec.dims = get_or(j, "dims", 2);
        spec.input_limit = get_or(j, "input_limit", kInfiniteCost);
    } else if (type == "linear") {
        check_keys(j, {"type", "dt", "A", "B"}, "model");
        spec.kind = ModelKind::kLinear;
        if (!j.contains("A") || !j.contains("B")) throw ConfigError("model: linear needs A and B");
        spec.A = matrix_from(j.at("A"), "model.A");
        spec.B = matrix_from(j.at("B"), "model.B");
    } else {
        throw ConfigError("model.type must be bicycle, double_integrator or linear");
    }
    return spec;
}

json model_to(const ModelSpec& spec) {
    switch (spec.kind) {
        case ModelKind::kBicycle:
            return {{"type", "bicycle"}, {"dt", spec.dt}, {"l_f", spec.bicycle.l_f}, {"l_r", spec.bicycle.l_r}};
        case ModelKind::kDoubleIntegrator:
            return {{"type", "double_integrator"},
                    {"dt", spec.dt},
                    {"dims", spec.dims},
                    {"input_limit", finite_or_null(spec.input_limit)}};
        case ModelKind::kLinear:
            return {{"type", "linear"}, {"dt", spec.dt}, {"A", matrix_to(spec.A)}, {"B", matrix_to(spec.B)}};
    }
    return {};
}

PenaltyRegion parse_region(const json& j) {
    check_keys(j, {"shape", "center", "radius", "vertices", "penalty", "barrier", "barrier_margin"}, "region");
    PenaltyRegion region;
    const auto shape = get_or<std::string>(j, "shape", "");
    if (shape == "disc") {
        if (!j.contains("center")) throw ConfigError("region: disc needs a center");
        const Eigen::Vector2d c = point_from(j.at("center"), "region.center");
        region.shape = Disc{c.x(), c.y(), get_or(j, "radius", 1.0)};
    } else if (shape == "polygon") {
        Polygon poly;
        for (const auto& v : j.value("vertices", json::array())) poly.vertices.push_back(point_from(v, "region.vertices"));
        if (poly.vertices.size() < 3) throw ConfigError("region: polygon needs at least 3 vertices");
        region.shape = std::move(poly);
    } else {
        throw ConfigError("region.shape must be disc or polygon");
    }
    region.penalty = get_or(j, "penalty", 0.0);
    region.barrier = get_or(j, "barrier", false);
    region.barrier_margin = get_or(j, "barrier_margin", 0.0);
    return region;
}

json region_to(const PenaltyRegion& r) {
    json j;
    if (const auto* d = std::get_if<Disc>(&r.shape)) {
        j = {{"shape", "disc"}, {"center", {d->center_x, d->center_y}}, {"radius", d->radius}};
    } else {
        json verts = json::array();
        for (const auto& v : std::get<Polygon>(r.shape).vertices) verts.push_back(point_to(v));
        j = {{"shape", "polygon"}, {"vertices", verts}};
    }
    j["penalty"] = r.penalty;
    j["barrier"] = r.barrier;
    j["barrier_margin"] = r.barrier_margin;
    return j;
}

std::pair<double, double> range_from(const json& j, const char* key, std::pair<double, double> fallback) {
    if (!j.contains(key)) return fallback;
    const Eigen::Vector2d r = point_from(j.at(key), std::string("predictor.") + key);
    if (r.x() > r.y()) throw ConfigError(std::string("predictor.") + key + ": lo > hi");
    return {r.x(), r.y()};
}

PredictorSpec parse_predictor(const json& j) {
    PredictorSpec spec;
    const auto type = get_or<std::string>(j, "type", "zero");
    spec.index_x = get_or(j, "index_x", 0);
    spec.index_y = get_or(j, "index_y", 1);
    if (type == "zero") {
        check_keys(j, {"type", "index_x", "index_y"}, "predictor");
        spec.kind = PredictorKind::kZero;
    } else if (type == "gaussian_bumps") {
        check_keys(j, {"type", "index_x", "index_y", "bumps", "baseline"}, "predictor");
        spec.kind = PredictorKind::kGaussianBumps;
        for (const auto& b : j.value("bumps", json::array())) {
            check_keys(b, {"x", "y", "amplitude", "length_scale"}, "predictor.bumps");
            spec.bumps.push_back({get_or(b, "x", 0.0), get_or(b, "y", 0.0), get_or(b, "amplitude", 0.0),
                                  get_or(b, "length_scale", 1.0)});
        }
        if (j.contains("baseline") && !j.at("baseline").is_null()) {
            const json& b = j.at("baseline");
            check_keys(b, {"amplitude", "rate_x", "rate_y"}, "predictor.baseline");
            spec.baseline = ExponentialBaseline{get_or(b, "amplitude", 0.0), get_or(b, "rate_x", 0.0),
                                                get_or(b, "rate_y", 0.0)};
        }
    } else if (type == "random_bumps") {
        check_keys(j, {"type", "index_x", "index_y", "count", "box_lo", "box_hi", "amplitude", "length_scale"},
                   "predictor");
        spec.kind = PredictorKind::kRandomBumps;
        spec.random_bump_count = get_or(j, "count", spec.random_bump_count);
        if (j.contains("box_lo")) spec.random_box_lo = point_from(j.at("box_lo"), "predictor.box_lo");
        if (j.contains("box_hi")) spec.random_box_hi = point_from(j.at("box_hi"), "predictor.box_hi");
        std::tie(spec.random_amplitude_lo, spec.random_amplitude_hi) =
            range_from(j, "amplitude", {spec.random_amplitude_lo, spec.random_amplitude_hi});
        std::tie(spec.random_length_lo, spec.random_length_hi) =
            range_from(j, "length_scale", {spec.random_length_lo, spec.random_length_hi});
    } else if (type == "regions") {
        check_keys(j, {"type", "index_x", "index_y", "regions"}, "predictor");
        spec.kind = PredictorKind::kRegions;
        for (const auto& r : j.value("regions", json::array())) spec.regions.push_back(parse_region(r));
    } else {
        throw ConfigError("predictor.type must be zero, gaussian_bumps, random_bumps or regions");
    }
    return spec;
}

json predictor_to(const PredictorSpec& spec) {
    json j{{"index_x", spec.index_x}, {"index_y", spec.index_y}};
    switch (spec.kind) {
        case PredictorKind::kZero:
            j["type"] = "zero";
            break;
        case PredictorKind::kGaussianBumps: {
            j["type"] = "gaussian_bumps";
            json bumps = json::array();
            for (const auto& b : spec.bumps) {
                bumps.push_back(
                    {{"x", b.center_x}, {"y", b.center_y}, {"amplitude", b.amplitude}, {"length_scale", b.length_scale}});
            }
            j["bumps"] = bumps;
            if (spec.baseline) {
                j["baseline"] = {{"amplitude", spec.baseline->amplitude},
                                 {"rate_x", spec.baseline->rate_x},
                                 {"rate_y", spec.baseline->rate_y}};
            }
            break;
        }
        case PredictorKind::kRandomBumps:
            j["type"] = "random_bumps";
            j["count"] = spec.random_bump_count;
            j["box_lo"] = point_to(spec.random_box_lo);
            j["box_hi"] = point_to(spec.random_box_hi);
            j["amplitude"] = {spec.random_amplitude_lo, spec.random_amplitude_hi};
            j["length_scale"] = {spec.random_length_lo, spec.random_length_hi};
            break;
        case PredictorKind::kRegions: {
            j["type"] = "regions";
            json regions = json::array();
            for (const auto& r : spec.regions) regions.push_back(region_to(r));
            j["regions"] = regions;
            break;
        }
    }
    return j;
}

InitialTrajectorySpec parse_initial(const json& j) {
    check_keys(j,
               {"source", "path", "max_steps", "waypoints", "lookahead", "cruise_speed", "speed_gain",
                "capture_distance", "kp", "kd"},
               "initial");
    InitialTrajectorySpec spec;
    const auto source = get_or<std::string>(j, "source", "generated");
    if (source == "file") {
        spec.from_file = true;
        spec.path = get_or<std::string>(j, "path", "");
    } else if (source != "generated") {
        throw ConfigError("initial.source must be generated or file");
    }
    spec.max_steps = get_or(j, "max_steps", spec.max_steps);
    for (const auto& w : j.value("waypoints", json::array())) spec.waypoints.push_back(point_from(w, "initial.waypoints"));
    spec.lookahead = get_or(j, "lookahead", spec.lookahead);
    spec.cruise_speed = get_or(j, "cruise_speed", spec.cruise_speed);
    spec.speed_gain = get_or(j, "speed_gain", spec.speed_gain);
    spec.capture_distance = get_or(j, "capture_distance", spec.capture_distance);
    spec.kp = get_or(j, "kp", spec.kp);
    spec.kd = get_or(j, "kd", spec.kd);
    return spec;
}

json initial_to(const InitialTrajectorySpec& spec) {
    json j{{"source", spec.from_file ? "file" : "generated"}, {"max_steps", spec.max_steps}};
    if (spec.from_file) j["path"] = spec.path.string();
    json wps = json::array();
    for (const auto& w : spec.waypoints) wps.push_back(point_to(w));
    j["waypoints"] = wps;
    j["lookahead"] = spec.lookahead;
    j["cruise_speed"] = spec.cruise_speed;
    j["speed_gain"] = spec.speed_gain;
    j["capture_distance"] = spec.capture_distance;
    j["kp"] = spec.kp;
    j["kd"] = spec.kd;
    return j;
}

}  // namespace

void ExperimentConfig::validate() const {
    try {
        build_dmpc_config(*this).validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (model.kind == ModelKind::kDoubleIntegrator && !(model.input_limit > 0.0)) {
        throw ConfigError("model.input_limit must be > 0");
    }
    if (predictor.kind == PredictorKind::kRandomBumps) {
        if (predictor.random_bump_count < 0) throw ConfigError("predictor.count must be >= 0");
        if ((predictor.random_box_lo.array() > predictor.random_box_hi.array()).any()) {
            throw ConfigError("predictor.box_lo must not exceed box_hi");
        }
    }
    if (initial.from_file && !std::filesystem::exists(initial.path)) {
        throw ConfigError("initial trajectory file not found: " + initial.path.string());
    }
    if (initial.max_steps < 1) throw ConfigError("initial.max_steps must be >= 1");
}

ExperimentConfig parse_config(const json& doc) {
    check_keys(doc,
               {"scenario", "model", "weights", "x_start", "x_final", "horizon", "epsilon", "equilibrium_tolerance",
                "max_steps_per_iteration", "max_iterations", "pruning_radius_factor", "repredict_shifted", "parallel",
                "predictor", "initial", "output_dir", "seed"},
               "config");
    for (const char* key : {"model", "weights", "x_start", "x_final"}) {
        if (!doc.contains(key)) throw ConfigError(std::string("config: missing '") + key + "'");
    }
    ExperimentConfig cfg;
    cfg.scenario = get_or<std::string>(doc, "scenario", cfg.scenario);
    cfg.model = parse_model(doc.at("model"));
    const json& w = doc.at("weights");
    check_keys(w, {"P", "R"}, "weights");
    if (!w.contains("P") || !w.contains("R")) throw ConfigError("weights: need P and R");
    cfg.P = vector_from(w.at("P"), "weights.P");
    cfg.R = vector_from(w.at("R"), "weights.R");
    cfg.x_start = vector_from(doc.at("x_start"), "x_start");
    cfg.x_final = vector_from(doc.at("x_final"), "x_final");
    cfg.horizon = get_or(doc, "horizon", cfg.horizon);
    cfg.epsilon = get_or(doc, "epsilon", cfg.epsilon);
    cfg.equilibrium_tolerance = get_or(doc, "equilibrium_tolerance", cfg.equilibrium_tolerance);
    cfg.max_steps_per_iteration = get_or(doc, "max_steps_per_iteration", cfg.max_steps_per_iteration);
    cfg.max_iterations = get_or(doc, "max_iterations", cfg.max_iterations);
    cfg.pruning_radius_factor = get_or(doc, "pruning_radius_factor", cfg.pruning_radius_factor);
    cfg.repredict_shifted = get_or(doc, "repredict_shifted", cfg.repredict_shifted);
    cfg.parallel = get_or(doc, "parallel", cfg.parallel);
    if (doc.contains("predictor")) cfg.predictor = parse_predictor(doc.at("predictor"));
    if (doc.contains("initial")) cfg.initial = parse_initial(doc.at("initial"));
    cfg.output_dir = get_or<std::string>(doc, "output_dir", cfg.output_dir.string());
    cfg.seed = get_or<std::uint64_t>(doc, "seed", cfg.seed);
    cfg.validate();
    return cfg;
}

json to_json(const ExperimentConfig& cfg) {
    return {{"scenario", cfg.scenario},
            {"model", model_to(cfg.model)},
            {"weights", {{"P", vector_to(cfg.P)}, {"R", vector_to(cfg.R)}}},
            {"x_start", vector_to(cfg.x_start)},
            {"x_final", vector_to(cfg.x_final)},
            {"horizon", cfg.horizon},
            {"epsilon", cfg.epsilon},
            {"equilibrium_tolerance", cfg.equilibrium_tolerance},
            {"max_steps_per_iteration", cfg.max_steps_per_iteration},
            {"max_iterations", cfg.max_iterations},
            {"pruning_radius_factor", cfg.pruning_radius_factor},
            {"repredict_shifted", cfg.repredict_shifted},
            {"parallel", cfg.parallel},
            {"predictor", predictor_to(cfg.predictor)},
            {"initial", initial_to(cfg.initial)},
            {"output_dir", cfg.output_dir.string()},
            {"seed", cfg.seed}};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    ExperimentConfig cfg = parse_config(doc);
    if (cfg.initial.from_file && cfg.initial.path.is_relative()) {
        cfg.initial.path = path.parent_path() / cfg.initial.path;
    }
    return cfg;
}

SystemModel build_model(const ModelSpec& spec) {
    switch (spec.kind) {
        case ModelKind::kBicycle:
            return make_bicycle_model(spec.bicycle, spec.dt);
        case ModelKind::kDoubleIntegrator: {
            SystemModel model = make_double_integrator(spec.dims, spec.dt);
            model.u_lo.setConstant(-spec.input_limit);
            model.u_hi.setConstant(spec.input_limit);
            return model;
        }
        case ModelKind::kLinear:
            return make_linear_model(spec.A, spec.B, spec.dt);
    }
    throw ConfigError("unknown model kind");
}

std::unique_ptr<Predictor> build_predictor(const PredictorSpec& spec, std::uint64_t seed) {
    switch (spec.kind) {
        case PredictorKind::kZero:
            return std::make_unique<ZeroPredictor>();
        case PredictorKind::kGaussianBumps:
            return std::make_unique<GaussianBumpField>(spec.bumps, spec.index_x, spec.index_y, spec.baseline);
        case PredictorKind::kRandomBumps: {
            std::mt19937_64 rng(seed);
            auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
            std::vector<GaussianBump> bumps;
            for (int i = 0; i < spec.random_bump_count; ++i) {
                GaussianBump b;
                b.center_x = uniform(spec.random_box_lo.x(), spec.random_box_hi.x());
                b.center_y = uniform(spec.random_box_lo.y(), spec.random_box_hi.y());
                b.amplitude = uniform(spec.random_amplitude_lo, spec.random_amplitude_hi);
                b.length_scale = uniform(spec.random_length_lo, spec.random_length_hi);
                bumps.push_back(b);
            }
            return std::make_unique<GaussianBumpField>(std::move(bumps), spec.index_x, spec.index_y);
        }
        case PredictorKind::kRegions:
            return std::make_unique<RegionPenaltyField>(spec.regions, spec.index_x, spec.index_y);
    }
    throw ConfigError("unknown predictor kind");
}

DmpcConfig build_dmpc_config(const ExperimentConfig& cfg) {
    DmpcConfig out;
    out.model = build_model(cfg.model);
    out.weights = CostWeights{cfg.P, cfg.R};
    out.x_start = cfg.x_start;
    out.x_final = cfg.x_final;
    out.horizon = cfg.horizon;
    out.epsilon = cfg.epsilon;
    out.equilibrium_tolerance = cfg.equilibrium_tolerance;
    out.max_steps_per_iteration = cfg.max_steps_per_iteration;
    out.max_iterations = cfg.max_iterations;
    out.pruning_radius_factor = cfg.pruning_radius_factor;
    out.repredict_shifted = cfg.repredict_shifted;
    out.execution = cfg.parallel ? Execution::kParallel : Execution::kSerial;
    return out;
}

ExperimentConfig bicycle_benchmark() {
    ExperimentConfig cfg;
    cfg.scenario = "bicycle_benchmark";
    cfg.model.kind = ModelKind::kBicycle;
    cfg.model.dt = 0.5;
    cfg.P = Eigen::Vector4d(1.0, 1.0, 0.1, 0.1);
    cfg.R = Eigen::Vector2d(0.01, 0.01);
    cfg.x_start = Eigen::Vector4d(0.0, 5.0, std::numbers::pi / 2.0, 0.0);
    cfg.x_final = Eigen::Vector4d(51.0, 10.0, std::numbers::pi / 10.0, 1.1);
    cfg.horizon = 12;
    cfg.epsilon = 1e-4;
    cfg.predictor.kind = PredictorKind::kGaussianBumps;
    cfg.predictor.bumps = {{12.0, 14.0, 40.0, 4.0}, {30.0, 8.0, 60.0, 5.0}, {44.0, 16.0, 30.0, 3.0}};
    cfg.predictor.baseline = ExponentialBaseline{5.0, 0.0, -1.0 / 70.0};
    cfg.initial.waypoints = {{0.0, 14.0}, {8.0, 22.0}, {24.0, 22.0}, {40.0, 4.0}, {51.0, 10.0}};
    cfg.output_dir = "out/bicycle";
    return cfg;
}

ExperimentConfig random_double_integrator(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

    ExperimentConfig cfg;
    cfg.scenario = "double_integrator_" + std::to_string(seed);
    cfg.seed = seed;
    cfg.model.kind = ModelKind::kDoubleIntegrator;
    cfg.model.dims = 2;
    cfg.model.dt = 0.5;
    cfg.model.input_limit = 1.0;
    cfg.P = Eigen::Vector4d(1.0, 1.0, 0.5, 0.5);
    cfg.R = Eigen::Vector2d(0.1, 0.1);

    const double radius = uniform(5.0, 10.0);
    const double angle = uniform(0.0, 2.0 * std::numbers::pi);
    cfg.x_start = Eigen::Vector4d(radius * std::cos(angle), radius * std::sin(angle), 0.0, 0.0);
    cfg.x_final = Eigen::Vector4d::Zero();
    cfg.horizon = 8;
    cfg.equilibrium_tolerance = 1e-3;
    cfg.max_iterations = 10;

    cfg.predictor.kind = PredictorKind::kRandomBumps;
    cfg.predictor.random_bump_count = 3;
    cfg.predictor.random_box_lo = cfg.x_start.head<2>().cwiseMin(Eigen::Vector2d::Zero()).array() - 2.0;
    cfg.predictor.random_box_hi = cfg.x_start.head<2>().cwiseMax(Eigen::Vector2d::Zero()).array() + 2.0;
    cfg.predictor.random_amplitude_lo = 2.0;
    cfg.predictor.random_amplitude_hi = 20.0;
    cfg.predictor.random_length_lo = 1.0;
    cfg.predictor.random_length_hi = 3.0;

    cfg.initial.kp = uniform(0.2, 0.6);
    cfg.initial.kd = uniform(0.8, 1.5);
    cfg.output_dir = "";
    return cfg;
}

}  // namespace dmpc::harness

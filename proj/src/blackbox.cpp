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


#include "dmpc/blackbox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dmpc {

std::vector<double> Predictor::predict_segment(std::span<const State> states, std::span<const Input> inputs) {
    if (states.size() != inputs.size() + 1) {
        throw DimensionMismatch("predict_segment: expected " + std::to_string(inputs.size() + 1) + " states, got " +
                                std::to_string(states.size()));
    }
    std::vector<double> z(inputs.size());
    for (std::size_t k = 0; k < inputs.size(); ++k) z[k] = evaluate(states[k], inputs[k]);
    queries_.fetch_add(1);
    samples_.fetch_add(inputs.size());
    return z;
}

void Predictor::reset_counters() noexcept {
    queries_.store(0);
    samples_.store(0);
}

GaussianBumpField::GaussianBumpField(std::vector<GaussianBump> bumps, int index_x, int index_y,
                                     std::optional<ExponentialBaseline> baseline)
    : bumps_(std::move(bumps)), index_x_(index_x), index_y_(index_y), baseline_(baseline) {
    for (const auto& b : bumps_) {
        if (!(b.amplitude >= 0.0)) throw std::invalid_argument("GaussianBumpField: amplitude must be >= 0");
        if (!(b.length_scale > 0.0)) throw std::invalid_argument("GaussianBumpField: length_scale must be > 0");
    }
    if (baseline_ && baseline_->amplitude < 0.0) throw std::invalid_argument("GaussianBumpField: negative baseline");
}

double GaussianBumpField::value_at(double px, double py) const {
    double z = 0.0;
    for (const auto& b : bumps_) {
        const double dx = px - b.center_x;
        const double dy = py - b.center_y;
        z += b.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * b.length_scale * b.length_scale));
    }
    if (baseline_) z += baseline_->amplitude * std::exp(baseline_->rate_x * px + baseline_->rate_y * py);
    return z;
}

double GaussianBumpField::evaluate(const State& x, const Input&) const {
    return value_at(x(index_x_), index_y_ >= 0 ? x(index_y_) : 0.0);
}

double signed_depth(const std::variant<Disc, Polygon>& shape, double px, double py) {
    if (const auto* d = std::get_if<Disc>(&shape)) {
        return d->radius - std::hypot(px - d->center_x, py - d->center_y);
    }
    const auto& verts = std::get<Polygon>(shape).vertices;
    const Eigen::Vector2d p(px, py);
    bool inside = false;
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0, j = verts.size() - 1; i < verts.size(); j = i++) {
        const Eigen::Vector2d& a = verts[j];
        const Eigen::Vector2d& b = verts[i];
        if (((b.y() > py) != (a.y() > py)) && (px < (a.x() - b.x()) * (py - b.y()) / (a.y() - b.y()) + b.x())) {
            inside = !inside;
        }
        const Eigen::Vector2d ab = b - a;
        const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
        dist = std::min(dist, (a + t * ab - p).norm());
    }
    return inside ? dist : -dist;
}

RegionPenaltyField::RegionPenaltyField(std::vector<PenaltyRegion> regions, int index_x, int index_y)
    : regions_(std::move(regions)), index_x_(index_x), index_y_(index_y) {
    for (const auto& r : regions_) {
        if (!(r.penalty >= 0.0)) throw std::invalid_argument("RegionPenaltyField: penalty must be >= 0");
        if (r.barrier_margin < 0.0) throw std::invalid_argument("RegionPenaltyField: negative barrier margin");
        if (const auto* poly = std::get_if<Polygon>(&r.shape); poly && poly->vertices.size() < 3) {
            throw std::invalid_argument("RegionPenaltyField: polygon needs at least 3 vertices");
        }
    }
}

double RegionPenaltyField::value_at(double px, double py) const {
    double z = 0.0;
    for (const auto& r : regions_) {
        const double depth = signed_depth(r.shape, px, py);
        if (r.barrier) {
            if (depth >= 0.0 || -depth < r.barrier_margin) z += barrier_transform(depth);
        } else if (depth >= 0.0) {
            z += r.penalty;
        }
    }
    return z;
}

double RegionPenaltyField::evaluate(const State& x, const Input&) const {
    return value_at(x(index_x_), index_y_ >= 0 ? x(index_y_) : 0.0);
}

}  // namespace dmpc

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

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "dmpc/costs.hpp"

namespace dmpc {

/// The controller's only view of the unknown stage cost.
///
/// `predict_segment` takes a plan segment (N+1 states, N inputs) and returns one zhat per stage.
/// The terminal state is not charged. Implementations must be deterministic and safe to call
/// from concurrent candidate evaluations; the counters are atomic.
class Predictor {
public:
    virtual ~Predictor() = default;

    std::vector<double> predict_segment(std::span<const State> states, std::span<const Input> inputs);

    void reset_counters() noexcept;
    [[nodiscard]] std::uint64_t query_count() const noexcept { return queries_.load(); }
    [[nodiscard]] std::uint64_t sample_count() const noexcept { return samples_.load(); }

protected:
    /// Pointwise evaluation. Must be >= 0 or kInfiniteCost.
    [[nodiscard]] virtual double evaluate(const State& x, const Input& u) const = 0;

private:
    std::atomic<std::uint64_t> queries_{0};
    std::atomic<std::uint64_t> samples_{0};
};

class ZeroPredictor final : public Predictor {
protected:
    [[nodiscard]] double evaluate(const State&, const Input&) const override { return 0.0; }
};

struct GaussianBump {
    double center_x{0.0};
    double center_y{0.0};
    double amplitude{0.0};
    double length_scale{1.0};
};

/// amplitude * exp(rate_x * px + rate_y * py)
struct ExponentialBaseline {
    double amplitude{0.0};
    double rate_x{0.0};
    double rate_y{0.0};
};

/// Sum of Gaussian bumps a * exp(-|p - c|^2 / (2 l^2)) over a planar position read from the state,
/// plus an optional baseline. Ignores the input.
class GaussianBumpField final : public Predictor {
public:
    GaussianBumpField(std::vector<GaussianBump> bumps, int index_x = 0, int index_y = 1,
                      std::optional<ExponentialBaseline> baseline = std::nullopt);

    [[nodiscard]] double value_at(double px, double py) const;
    [[nodiscard]] const std::vector<GaussianBump>& bumps() const noexcept { return bumps_; }

protected:
    [[nodiscard]] double evaluate(const State& x, const Input& u) const override;

private:
    std::vector<GaussianBump> bumps_;
    int index_x_;
    int index_y_;
    std::optional<ExponentialBaseline> baseline_;
};

struct Disc {
    double center_x{0.0};
    double center_y{0.0};
    double radius{1.0};
};

struct Polygon {
    std::vector<Eigen::Vector2d> vertices;
};

/// A region either charges a constant penalty inside, or acts as a forbidden zone: the unknown
/// constraint y = (signed depth inside the region) <= 0 is mapped through barrier_transform.
/// With a positive `barrier_margin`, points outside but closer than the margin get -1/y with
/// y = -(distance to the boundary).
struct PenaltyRegion {
    std::variant<Disc, Polygon> shape;
    double penalty{0.0};
    bool barrier{false};
    double barrier_margin{0.0};
};

class RegionPenaltyField final : public Predictor {
public:
    RegionPenaltyField(std::vector<PenaltyRegion> regions, int index_x = 0, int index_y = 1);

    [[nodiscard]] double value_at(double px, double py) const;
    [[nodiscard]] const std::vector<PenaltyRegion>& regions() const noexcept { return regions_; }

protected:
    [[nodiscard]] double evaluate(const State& x, const Input& u) const override;

private:
    std::vector<PenaltyRegion> regions_;
    int index_x_;
    int index_y_;
};

/// Signed distance to the region boundary: positive inside, negative outside.
[[nodiscard]] double signed_depth(const std::variant<Disc, Polygon>& shape, double px, double py);

}  // namespace dmpc

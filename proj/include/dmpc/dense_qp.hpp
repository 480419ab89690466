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

#include <vector>

#include <Eigen/Dense>

namespace dmpc {

enum class QpStatus { kOptimal, kInfeasible, kDegenerate };

struct QpResult {
    QpStatus status{QpStatus::kInfeasible};
    Eigen::VectorXd x;
    double objective{0.0};
    Eigen::VectorXd eq_multipliers;    // one per equality column
    Eigen::VectorXd ineq_multipliers;  // one per inequality column, >= 0, zero when inactive
};

/// Dense strictly convex QP
///   min 0.5 x'Gx + g'x   s.t.   CE'x + ce = 0,   CI'x + ci >= 0
/// by the dual active-set method of Goldfarb and Idnani. G must be positive definite.
/// Constraints are stored column-wise.
[[nodiscard]] QpResult solve_dense_qp(const Eigen::MatrixXd& G, const Eigen::VectorXd& g, const Eigen::MatrixXd& CE,
                                      const Eigen::VectorXd& ce, const Eigen::MatrixXd& CI, const Eigen::VectorXd& ci);

}  // namespace dmpc

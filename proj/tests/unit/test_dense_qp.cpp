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


#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "dmpc/dense_qp.hpp"

namespace dmpc {
namespace {

struct RandomQp {
    Eigen::MatrixXd G;
    Eigen::VectorXd g;
    Eigen::MatrixXd CE;
    Eigen::VectorXd ce;
    Eigen::MatrixXd CI;
    Eigen::VectorXd ci;
};

RandomQp random_qp(std::uint64_t seed, int n, int me, int mi) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> N01;
    auto mat = [&](int r, int c) {
        Eigen::MatrixXd M(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) M(i, j) = N01(rng);
        return M;
    };
    RandomQp q;
    const Eigen::MatrixXd L = mat(n, n);
    q.G = L * L.transpose() + 0.5 * Eigen::MatrixXd::Identity(n, n);
    q.g = mat(n, 1);
    q.CE = mat(n, me);
    q.ce = mat(me, 1);
    q.CI = mat(n, mi);
    // x = 0 is strictly feasible for the inequalities
    q.ci = mat(mi, 1).cwiseAbs().array() + 0.1;
    if (me > 0) {
        // shift so that some x satisfying the equalities also satisfies the inequalities
        const Eigen::VectorXd x0 = q.CE.transpose().completeOrthogonalDecomposition().solve(-q.ce);
        q.ci = q.ci - q.CI.transpose() * x0;
    }
    return q;
}

double objective(const RandomQp& q, const Eigen::VectorXd& x) { return 0.5 * x.dot(q.G * x) + q.g.dot(x); }

// Every subset of inequalities is tried as an active set; the best primal-feasible stationary point wins.
double brute_force(const RandomQp& q) {
    const int n = static_cast<int>(q.G.rows());
    const int me = static_cast<int>(q.CE.cols());
    const int mi = static_cast<int>(q.CI.cols());
    double best = std::numeric_limits<double>::infinity();
    for (int mask = 0; mask < (1 << mi); ++mask) {
        std::vector<int> act;
        for (int i = 0; i < mi; ++i)
            if (mask & (1 << i)) act.push_back(i);
        const int ma = me + static_cast<int>(act.size());
        if (ma > n) continue;
        Eigen::MatrixXd A(n, ma);
        Eigen::VectorXd b(ma);
        A.leftCols(me) = q.CE;
        b.head(me) = q.ce;
        for (std::size_t k = 0; k < act.size(); ++k) {
            A.col(me + k) = q.CI.col(act[k]);
            b(me + k) = q.ci(act[k]);
        }
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n + ma, n + ma);
        K.topLeftCorner(n, n) = q.G;
        K.topRightCorner(n, ma) = A;
        K.bottomLeftCorner(ma, n) = A.transpose();
        Eigen::VectorXd rhs(n + ma);
        rhs << -q.g, -b;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
        if (lu.rank() < n + ma) continue;
        const Eigen::VectorXd x = lu.solve(rhs).head(n);
        if ((q.CI.transpose() * x + q.ci).minCoeff() < -1e-9) continue;
        best = std::min(best, objective(q, x));
    }
    return best;
}

TEST(DenseQp, UnconstrainedMinimum) {
    Eigen::MatrixXd G(2, 2);
    G << 2, 0, 0, 4;
    const Eigen::VectorXd g = Eigen::Vector2d(-2, -8);
    const QpResult r = solve_dense_qp(G, g, Eigen::MatrixXd(2, 0), Eigen::VectorXd(0), Eigen::MatrixXd(2, 0),
                                      Eigen::VectorXd(0));
    ASSERT_EQ(r.status, QpStatus::kOptimal);
    EXPECT_NEAR(r.x(0), 1.0, 1e-12);
    EXPECT_NEAR(r.x(1), 2.0, 1e-12);
    EXPECT_NEAR(r.objective, -9.0, 1e-12);
}

TEST(DenseQp, BoxActive) {
    // min (x-3)^2 s.t. x <= 1
    const Eigen::MatrixXd G = Eigen::MatrixXd::Constant(1, 1, 2.0);
    const Eigen::VectorXd g = Eigen::VectorXd::Constant(1, -6.0);
    const QpResult r = solve_dense_qp(G, g, Eigen::MatrixXd(1, 0), Eigen::VectorXd(0),
                                      Eigen::MatrixXd::Constant(1, 1, -1.0), Eigen::VectorXd::Constant(1, 1.0));
    ASSERT_EQ(r.status, QpStatus::kOptimal);
    EXPECT_NEAR(r.x(0), 1.0, 1e-12);
    EXPECT_NEAR(r.ineq_multipliers(0), 4.0, 1e-12);
}

TEST(DenseQp, InfeasibleDetected) {
    // x >= 1 and x <= 0
    const Eigen::MatrixXd G = Eigen::MatrixXd::Identity(1, 1);
    Eigen::MatrixXd CI(1, 2);
    CI << 1.0, -1.0;
    const QpResult r = solve_dense_qp(G, Eigen::VectorXd::Zero(1), Eigen::MatrixXd(1, 0), Eigen::VectorXd(0), CI,
                                      Eigen::Vector2d(-1.0, 0.0));
    EXPECT_EQ(r.status, QpStatus::kInfeasible);
}

TEST(DenseQp, EqualityMatchesKkt) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const RandomQp q = random_qp(seed, 6, 2, 0);
        Eigen::MatrixXd K = Eigen::MatrixXd::Zero(8, 8);
        K.topLeftCorner(6, 6) = q.G;
        K.topRightCorner(6, 2) = q.CE;
        K.bottomLeftCorner(2, 6) = q.CE.transpose();
        Eigen::VectorXd rhs(8);
        rhs << -q.g, -q.ce;
        const Eigen::VectorXd ref = K.fullPivLu().solve(rhs).head(6);
        const QpResult r = solve_dense_qp(q.G, q.g, q.CE, q.ce, q.CI, q.ci);
        ASSERT_EQ(r.status, QpStatus::kOptimal);
        EXPECT_LT((r.x - ref).norm(), 1e-9 * (1 + ref.norm()));
    }
}

TEST(DenseQp, InequalityMatchesBruteForce) {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        const RandomQp q = random_qp(100 + seed, 5, seed % 2 ? 1 : 0, 7);
        const QpResult r = solve_dense_qp(q.G, q.g, q.CE, q.ce, q.CI, q.ci);
        ASSERT_EQ(r.status, QpStatus::kOptimal) << "seed " << seed;
        EXPECT_GE((q.CI.transpose() * r.x + q.ci).minCoeff(), -1e-9);
        if (q.CE.cols() > 0) EXPECT_LT((q.CE.transpose() * r.x + q.ce).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_GE(r.ineq_multipliers.minCoeff(), 0.0);
        const double ref = brute_force(q);
        EXPECT_NEAR(r.objective, ref, 1e-8 * (1 + std::abs(ref))) << "seed " << seed;
        EXPECT_NEAR(objective(q, r.x), r.objective, 1e-9 * (1 + std::abs(ref)));
    }
}

}  // namespace
}  // namespace dmpc

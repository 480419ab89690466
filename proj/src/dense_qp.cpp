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


#include "dmpc/dense_qp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

// Givens rotation that zeroes b against a; returns false when both are zero.
bool givens(double a, double b, double& c, double& s, double& h) {
    h = std::hypot(a, b);
    if (h == 0.0) return false;
    c = a / h;
    s = b / h;
    if (c < 0.0) {
        c = -c;
        s = -s;
        h = -h;
    }
    return true;
}

class DualActiveSet {
public:
    DualActiveSet(const Eigen::MatrixXd& G, const Eigen::VectorXd& g, const Eigen::MatrixXd& CE,
                  const Eigen::VectorXd& ce, const Eigen::MatrixXd& CI, const Eigen::VectorXd& ci)
        : G_(G), g_(g), CE_(CE), ce_(ce), CI_(CI), ci_(ci), n_(static_cast<int>(G.rows())),
          p_(static_cast<int>(CE.cols())), m_(static_cast<int>(CI.cols())) {}

    QpResult solve() {
        QpResult res;
        Eigen::LLT<Eigen::MatrixXd> chol(G_);
        if (chol.info() != Eigen::Success) throw std::invalid_argument("solve_dense_qp: G is not positive definite");
        const Eigen::MatrixXd L = chol.matrixL();
        J_ = L.transpose().triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(n_, n_));
        R_ = Eigen::MatrixXd::Zero(n_, n_);
        const double c1 = G_.trace();
        const double c2 = J_.trace();
        r_norm_ = 1.0;

        x_ = chol.solve(-g_);
        u_ = Eigen::VectorXd::Zero(n_ + 1);
        active_.assign(n_ + 1, 0);
        d_.resize(n_);
        z_.resize(n_);
        r_.resize(n_);
        iq_ = 0;

        for (int i = 0; i < p_; ++i) {
            const Eigen::VectorXd np = CE_.col(i);
            update_direction(np);
            double t2 = 0.0;
            if (z_.squaredNorm() > kEps) t2 = (-np.dot(x_) - ce_(i)) / z_.dot(np);
            x_ += t2 * z_;
            u_(iq_) = t2;
            u_.head(iq_) -= t2 * r_.head(iq_);
            active_[iq_] = -i - 1;
            if (!add_constraint()) return finish(QpStatus::kDegenerate);
        }

        std::vector<int> iai(m_);
        std::vector<char> excluded(m_, 0);
        Eigen::VectorXd s(m_);
        for (int outer = 0; outer < 10 * (m_ + n_) + 100; ++outer) {
            for (int i = 0; i < m_; ++i) iai[i] = i;
            for (int i = p_; i < iq_; ++i) iai[active_[i]] = -1;
            double psi = 0.0;
            for (int i = 0; i < m_; ++i) {
                excluded[i] = 0;
                s(i) = CI_.col(i).dot(x_) + ci_(i);
                psi += std::min(0.0, s(i));
            }
            if (std::abs(psi) <= m_ * kEps * c1 * c2 * 100.0) return finish(QpStatus::kOptimal);

            const Eigen::VectorXd u_old = u_.head(iq_);
            const std::vector<int> active_old(active_.begin(), active_.begin() + iq_);
            const int iq_old = iq_;
            const Eigen::VectorXd x_old = x_;

            bool restart = true;
            while (restart) {
                restart = false;
                // most violated inequality not yet active
                int ip = -1;
                double ss = 0.0;
                for (int i = 0; i < m_; ++i) {
                    if (s(i) < ss && iai[i] != -1 && !excluded[i]) {
                        ss = s(i);
                        ip = i;
                    }
                }
                if (ip < 0) return finish(QpStatus::kOptimal);
                const Eigen::VectorXd np = CI_.col(ip);
                u_(iq_) = 0.0;
                active_[iq_] = ip;

                for (int inner = 0; inner < 10 * (m_ + n_) + 100; ++inner) {
                    update_direction(np);
                    // partial step length (dual feasibility)
                    int l = -1;
                    double t1 = kInf;
                    for (int k = p_; k < iq_; ++k) {
                        if (r_(k) > 0.0 && u_(k) / r_(k) < t1) {
                            t1 = u_(k) / r_(k);
                            l = active_[k];
                        }
                    }
                    // full step length (primal feasibility)
                    const double zn = z_.dot(np);
                    const double t2 = z_.squaredNorm() > kEps ? -s(ip) / zn : kInf;
                    const double t = std::min(t1, t2);
                    if (!std::isfinite(t)) return finish(QpStatus::kInfeasible);

                    if (!std::isfinite(t2)) {
                        u_.head(iq_) -= t * r_.head(iq_);
                        u_(iq_) += t;
                        iai[l] = l;
                        delete_constraint(l);
                        continue;
                    }
                    x_ += t * z_;
                    u_.head(iq_) -= t * r_.head(iq_);
                    u_(iq_) += t;
                    if (t == t2) {
                        if (!add_constraint()) {
                            excluded[ip] = 1;
                            delete_constraint(ip);
                            for (int i = 0; i < m_; ++i) iai[i] = i;
                            iq_ = iq_old;
                            for (int i = 0; i < iq_; ++i) {
                                active_[i] = active_old[i];
                                u_(i) = u_old(i);
                                if (i >= p_) iai[active_[i]] = -1;
                            }
                            x_ = x_old;
                            rebuild_factors();
                            restart = true;
                        } else {
                            iai[ip] = -1;
                        }
                        break;
                    }
                    iai[l] = l;
                    delete_constraint(l);
                    s(ip) = CI_.col(ip).dot(x_) + ci_(ip);
                }
            }
        }
        return finish(QpStatus::kDegenerate);
    }

private:
    // d = J' np, z = J2 d2, r = R^{-1} d1
    void update_direction(const Eigen::VectorXd& np) {
        d_ = J_.transpose() * np;
        z_ = J_.rightCols(n_ - iq_) * d_.tail(n_ - iq_);
        if (iq_ > 0) {
            r_.head(iq_) = R_.topLeftCorner(iq_, iq_).triangularView<Eigen::Upper>().solve(d_.head(iq_));
        }
    }

    bool add_constraint() {
        for (int j = n_ - 1; j >= iq_ + 1; --j) {
            double c;
            double s;
            double h;
            if (!givens(d_(j - 1), d_(j), c, s, h)) continue;
            d_(j) = 0.0;
            d_(j - 1) = h;
            const double xny = s / (1.0 + c);
            for (int k = 0; k < n_; ++k) {
                const double t1 = J_(k, j - 1);
                const double t2 = J_(k, j);
                J_(k, j - 1) = t1 * c + t2 * s;
                J_(k, j) = xny * (t1 + J_(k, j - 1)) - t2;
            }
        }
        ++iq_;
        R_.col(iq_ - 1).head(iq_) = d_.head(iq_);
        if (std::abs(d_(iq_ - 1)) <= kEps * r_norm_) return false;
        r_norm_ = std::max(r_norm_, std::abs(d_(iq_ - 1)));
        return true;
    }

    void delete_constraint(int l) {
        int qq = -1;
        for (int i = p_; i < iq_; ++i) {
            if (active_[i] == l) {
                qq = i;
                break;
            }
        }
        if (qq < 0) return;
        for (int i = qq; i < iq_ - 1; ++i) {
            active_[i] = active_[i + 1];
            u_(i) = u_(i + 1);
            R_.col(i) = R_.col(i + 1);
        }
        active_[iq_ - 1] = active_[iq_];
        u_(iq_ - 1) = u_(iq_);
        active_[iq_] = 0;
        u_(iq_) = 0.0;
        R_.col(iq_ - 1).setZero();
        --iq_;
        for (int j = qq; j < iq_; ++j) {
            double c;
            double s;
            double h;
            if (!givens(R_(j, j), R_(j + 1, j), c, s, h)) continue;
            R_(j + 1, j) = 0.0;
            R_(j, j) = h;
            const double xny = s / (1.0 + c);
            for (int k = j + 1; k < iq_; ++k) {
                const double t1 = R_(j, k);
                const double t2 = R_(j + 1, k);
                R_(j, k) = t1 * c + t2 * s;
                R_(j + 1, k) = xny * (t1 + R_(j, k)) - t2;
            }
            for (int k = 0; k < n_; ++k) {
                const double t1 = J_(k, j);
                const double t2 = J_(k, j + 1);
                J_(k, j) = t1 * c + t2 * s;
                J_(k, j + 1) = xny * (J_(k, j) + t1) - t2;
            }
        }
    }

    // Refactor J and R for the current active list (after restoring a saved active set).
    void rebuild_factors() {
        const std::vector<int> act(active_.begin(), active_.begin() + iq_);
        Eigen::LLT<Eigen::MatrixXd> chol(G_);
        const Eigen::MatrixXd L = chol.matrixL();
        J_ = L.transpose().triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(n_, n_));
        R_.setZero();
        r_norm_ = 1.0;
        const int count = iq_;
        iq_ = 0;
        for (int i = 0; i < count; ++i) {
            const Eigen::VectorXd np = act[i] < 0 ? Eigen::VectorXd(CE_.col(-act[i] - 1)) : Eigen::VectorXd(CI_.col(act[i]));
            d_ = J_.transpose() * np;
            add_constraint();
        }
    }

    QpResult finish(QpStatus status) {
        QpResult res;
        res.status = status;
        res.x = x_;
        res.objective = 0.5 * x_.dot(G_ * x_) + g_.dot(x_);
        res.eq_multipliers = Eigen::VectorXd::Zero(p_);
        res.ineq_multipliers = Eigen::VectorXd::Zero(m_);
        for (int i = 0; i < iq_; ++i) {
            if (active_[i] < 0) {
                res.eq_multipliers(-active_[i] - 1) = u_(i);
            } else {
                res.ineq_multipliers(active_[i]) = u_(i);
            }
        }
        return res;
    }

    const Eigen::MatrixXd& G_;
    const Eigen::VectorXd& g_;
    const Eigen::MatrixXd& CE_;
    const Eigen::VectorXd& ce_;
    const Eigen::MatrixXd& CI_;
    const Eigen::VectorXd& ci_;
    int n_;
    int p_;
    int m_;
    Eigen::MatrixXd J_;
    Eigen::MatrixXd R_;
    Eigen::VectorXd x_;
    Eigen::VectorXd u_;
    Eigen::VectorXd d_;
    Eigen::VectorXd z_;
    Eigen::VectorXd r_;
    std::vector<int> active_;
    int iq_{0};
    double r_norm_{1.0};
};

}  // namespace

QpResult solve_dense_qp(const Eigen::MatrixXd& G, const Eigen::VectorXd& g, const Eigen::MatrixXd& CE,
                        const Eigen::VectorXd& ce, const Eigen::MatrixXd& CI, const Eigen::VectorXd& ci) {
    const auto n = G.rows();
    if (G.cols() != n || g.size() != n || CE.rows() != n || CI.rows() != n || ce.size() != CE.cols() ||
        ci.size() != CI.cols()) {
        throw std::invalid_argument("solve_dense_qp: inconsistent dimensions");
    }
    if (CE.cols() > n) throw std::invalid_argument("solve_dense_qp: more equalities than variables");
    DualActiveSet solver(G, g, CE, ce, CI, ci);
    return solver.solve();
}

}  // namespace dmpc

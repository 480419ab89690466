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


#include "dmpc/trajopt.hpp"

#include "dmpc/dense_qp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dmpc {

std::string_view to_string(PlanSource source) noexcept {
    return source == PlanSource::kOptimized ? "optimized" : "shifted";
}

void FixedTerminalProblem::validate() const {
    if (model == nullptr) throw std::invalid_argument("FixedTerminalProblem: model is null");
    if (horizon < 1) throw std::invalid_argument("FixedTerminalProblem: horizon must be >= 1");
    if (x0.size() != model->n || terminal.size() != model->n) {
        throw DimensionMismatch("FixedTerminalProblem: x0/terminal size does not match the model");
    }
    if (weights.P.size() != model->n || weights.R.size() != model->m) {
        throw DimensionMismatch("FixedTerminalProblem: weights do not match the model");
    }
}

double dynamics_defect(const SystemModel& model, const HorizonPlan& plan) {
    double defect = 0.0;
    for (std::size_t k = 0; k < plan.inputs.size(); ++k) {
        const State next = step(model, plan.states[k], plan.inputs[k]);
        defect = std::max(defect, (plan.states[k + 1] - next).cwiseAbs().maxCoeff());
    }
    return defect;
}

double bound_violation(const SystemModel& model, const HorizonPlan& plan) {
    double viol = 0.0;
    for (const auto& x : plan.states) {
        viol = std::max(viol, (model.x_lo - x).maxCoeff());
        viol = std::max(viol, (x - model.x_hi).maxCoeff());
    }
    for (const auto& u : plan.inputs) {
        viol = std::max(viol, (model.u_lo - u).maxCoeff());
        viol = std::max(viol, (u - model.u_hi).maxCoeff());
    }
    return viol;
}

namespace {

// g = sign * (x_k[i] - bound) <= 0
struct StateBound {
    int k;
    int i;
    double sign;
    double bound;
};

struct Linearization {
    std::vector<State> X;
    std::vector<Eigen::MatrixXd> S;  // S[k] = d x_k / d U
    Eigen::VectorXd r;               // 0.5 |r|^2 = sum of the stage costs minus the constant x_0 term
    Eigen::MatrixXd J;
    Eigen::VectorXd c;  // x_N - s
    Eigen::VectorXd g;  // state bound values, <= 0 when satisfied
};

// Sequential quadratic programming on the input sequence. The Hessian is the Gauss-Newton matrix
// J'J of the stage-cost residuals; the terminal equality and the state bounds are linearized through
// the forward sensitivities, the input box is kept exact. Steps are globalized on the l1 merit
// f + nu (|c|_1 + sum max(0, g)) with a second-order correction against the Maratos effect.
class ShootingSolver {
public:
    ShootingSolver(const FixedTerminalProblem& problem, const SolverOptions& options)
        : p_(problem), model_(*problem.model), opt_(options), N_(problem.horizon), n_(model_.n), m_(model_.m),
          nu_(N_ * m_) {
        sqrt2P_ = (2.0 * p_.weights.P).cwiseSqrt();
        sqrt2R_ = (2.0 * p_.weights.R).cwiseSqrt();
        for (int i = 0; i < n_; ++i) {
            if (p_.weights.P(i) > 0.0) cost_state_idx_.push_back(i);
        }
        for (int i = 0; i < m_; ++i) {
            if (p_.weights.R(i) > 0.0) cost_input_idx_.push_back(i);
        }
        // x_N is pinned to the terminal state, whose bounds are a problem invariant.
        for (int k = 1; k < N_; ++k) {
            for (int i = 0; i < n_; ++i) {
                if (std::isfinite(model_.x_lo(i))) bounds_.push_back({k, i, -1.0, model_.x_lo(i)});
                if (std::isfinite(model_.x_hi(i))) bounds_.push_back({k, i, 1.0, model_.x_hi(i)});
            }
        }
        lo_.resize(nu_);
        hi_.resize(nu_);
        for (int k = 0; k < N_; ++k) {
            lo_.segment(k * m_, m_) = model_.u_lo;
            hi_.segment(k * m_, m_) = model_.u_hi;
        }
        for (int i = 0; i < nu_; ++i) {
            if (std::isfinite(lo_(i))) ++box_count_;
            if (std::isfinite(hi_(i))) ++box_count_;
        }
        rows_ = (N_ - 1) * static_cast<int>(cost_state_idx_.size()) + N_ * static_cast<int>(cost_input_idx_.size());
        nu_merit_ = opt_.initial_penalty;
    }

    SolveResult solve(std::span<const Input> warm) {
        Eigen::VectorXd U(nu_);
        for (int k = 0; k < N_; ++k) {
            if (k < static_cast<int>(warm.size())) {
                if (warm[k].size() != m_) throw DimensionMismatch("solve_fixed_terminal: warm input size mismatch");
                U.segment(k * m_, m_) = warm[k];
            } else {
                U.segment(k * m_, m_) = model_.u_eq;
            }
        }
        U = project(U);

        SolveResult result;
        auto& diag = result.diagnostics;
                if (opt_.record_merit_history) diag.merit_history.emplace_back();

        Linearization lin;
        Linearization trial;
        Linearization previous;
        linearize(U, lin, true);
        double phi = merit(lin);
        if (opt_.record_merit_history) diag.merit_history.back().push_back(phi);

        int stalled = 0;
        bool raise_helps = true;
        for (int it = 0; it < opt_.max_iterations && std::isfinite(phi); ++it) {
            const double feas = feasibility(lin);
            Step st = subproblem(U, lin, lin.c, lin.g, false);
            if (st.ok) {
                if (nu_merit_ < 1.1 * st.multiplier_norm && nu_merit_ < opt_.max_penalty &&
                    diag.penalty_updates < opt_.max_penalty_updates) {
                    nu_merit_ = std::min(opt_.max_penalty, 2.0 * st.multiplier_norm);
                    ++diag.penalty_updates;
                    phi = merit(lin);
                    if (opt_.record_merit_history) diag.merit_history.emplace_back().push_back(phi);
                }
            } else {
                // Linearization infeasible: l1-elastic step, raising the penalty while that still buys
                // linearized feasibility.
                st = subproblem(U, lin, lin.c, lin.g, true);
                while (raise_helps && st.ok && st.lin_violation > 1e-3 * violation(lin) && nu_merit_ < opt_.max_penalty &&
                       diag.penalty_updates < opt_.max_penalty_updates) {
                    nu_merit_ = std::min(opt_.max_penalty, 10.0 * nu_merit_);
                    Step raised = subproblem(U, lin, lin.c, lin.g, true);
                    ++diag.penalty_updates;
                    phi = merit(lin);
                    if (opt_.record_merit_history) diag.merit_history.emplace_back().push_back(phi);
                    const bool helped = raised.lin_violation < 0.9 * st.lin_violation;
                    st = std::move(raised);
                    raise_helps = helped;
                }
            }
            if (!st.ok) break;
            const Eigen::VectorXd& du = st.du;
            const double du_norm = du.cwiseAbs().maxCoeff();
            if (du_norm <= 1e-11 * (1.0 + U.cwiseAbs().maxCoeff()) && feas <= opt_.target_residual) break;

            // Model decrease of the merit along du; negative unless du = 0.
            const double slope = st.grad_dot_du + nu_merit_ * (st.lin_violation - violation(lin));
            if (slope >= 0.0 && du_norm <= 1e-11 * (1.0 + U.cwiseAbs().maxCoeff())) break;
            double alpha = 1.0;
            bool accepted = false;
            Eigen::VectorXd U_new;
            for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
                U_new = project(U + alpha * du);
                linearize(U_new, trial, false);
                double phi_new = merit(trial);
                if (std::isfinite(phi_new) && phi_new <= phi + 1e-4 * alpha * std::min(slope, 0.0)) {
                    accepted = true;
                    break;
                }
                if (ls == 0) {
                    // second-order correction: re-solve with the constraint values at the trial point
                    const Eigen::VectorXd c_soc = trial.c - lin.S[N_] * du;
                    Eigen::VectorXd g_soc = trial.g;
                    for (std::size_t j = 0; j < bounds_.size(); ++j) {
                        const auto& b = bounds_[j];
                        g_soc(static_cast<Eigen::Index>(j)) -= b.sign * lin.S[b.k].row(b.i).dot(du);
                    }
                    const Step soc = subproblem(U, lin, c_soc, g_soc, st.elastic);
                    if (soc.ok) {
                        U_new = project(U + soc.du);
                        linearize(U_new, trial, false);
                        phi_new = merit(trial);
                        if (std::isfinite(phi_new) && phi_new <= phi + 1e-4 * std::min(slope, 0.0)) {
                            accepted = true;
                            break;
                        }
                    }
                }
            }
            if (!accepted) break;

            const double step_norm = (U_new - U).cwiseAbs().maxCoeff();
            const double phi_old = phi;
            const Eigen::VectorXd step_taken = U_new - U;
            U = U_new;
            std::swap(lin, previous);
            linearize(U, lin, true);
            update_curvature(previous, lin, step_taken, st);
            phi = merit(lin);
            ++diag.iterations;
            if (opt_.record_merit_history) diag.merit_history.back().push_back(phi);

            const double feas_new = feasibility(lin);
            // A target outside the reachable set shows up as a linearization that stays infeasible.
            if (st.lin_violation > 1e-9 && feas_new > 0.999 * feas) {
                if (++stalled >= 3) break;
            } else {
                stalled = 0;
            }
            if (feas_new <= opt_.target_residual &&
                (step_norm <= 1e-12 * (1.0 + U.cwiseAbs().maxCoeff()) || phi_old - phi <= 1e-15 * std::abs(phi))) {
                break;
            }
        }

        const double cnorm = lin.c.cwiseAbs().maxCoeff();
        const double viol = lin.g.size() > 0 ? std::max(0.0, lin.g.maxCoeff()) : 0.0;
        diag.terminal_residual = cnorm;
        diag.bound_violation = viol;

        HorizonPlan& plan = result.plan;
        plan.source = PlanSource::kOptimized;
        plan.states = lin.X;
        plan.inputs.resize(N_);
        plan.stage_ell.resize(N_);
        double ell_sum = 0.0;
        for (int k = 0; k < N_; ++k) {
            plan.inputs[k] = U.segment(k * m_, m_);
            plan.stage_ell[k] = terminal_relative_stage_cost_ell(lin.X[k], plan.inputs[k], p_.terminal, p_.weights);
            ell_sum += plan.stage_ell[k];
        }
        plan.J_model = ell_sum + (N_ + 1) * p_.q_term;
        plan.J_overall = plan.J_model;
        plan.defect = std::max(dynamics_defect(model_, plan), cnorm);
        const bool ok = cnorm <= opt_.terminal_tolerance && viol <= opt_.bound_tolerance && std::isfinite(plan.J_model);
        result.status = ok ? SolveStatus::kSolved : SolveStatus::kInfeasible;
        return result;
    }

private:
    Eigen::VectorXd project(const Eigen::VectorXd& U) const { return U.cwiseMax(lo_).cwiseMin(hi_); }

    void linearize(const Eigen::VectorXd& U, Linearization& lin, bool with_jacobian) const {
        lin.X.resize(N_ + 1);
        lin.X[0] = p_.x0;
        if (with_jacobian) {
            lin.S.assign(N_ + 1, Eigen::MatrixXd::Zero(n_, nu_));
        }
        for (int k = 0; k < N_; ++k) {
            const auto u = U.segment(k * m_, m_);
            if (with_jacobian) {
                const StepJacobian jac = step_jacobian(model_, lin.X[k], u);
                if (k > 0) lin.S[k + 1].leftCols(k * m_) = jac.A * lin.S[k].leftCols(k * m_);
                lin.S[k + 1].middleCols(k * m_, m_) = jac.B;
            }
            lin.X[k + 1] = step(model_, lin.X[k], u);
        }

        lin.r.resize(rows_);
        if (with_jacobian) lin.J.setZero(rows_, nu_);
        int row = 0;
        for (int k = 1; k < N_; ++k) {
            for (int i : cost_state_idx_) {
                lin.r(row) = sqrt2P_(i) * (lin.X[k](i) - p_.terminal(i));
                if (with_jacobian) lin.J.row(row) = sqrt2P_(i) * lin.S[k].row(i);
                ++row;
            }
        }
        for (int k = 0; k < N_; ++k) {
            for (int i : cost_input_idx_) {
                lin.r(row) = sqrt2R_(i) * U(k * m_ + i);
                if (with_jacobian) lin.J(row, k * m_ + i) = sqrt2R_(i);
                ++row;
            }
        }
        lin.c = lin.X[N_] - p_.terminal;
        lin.g.resize(static_cast<Eigen::Index>(bounds_.size()));
        for (std::size_t j = 0; j < bounds_.size(); ++j) {
            const auto& b = bounds_[j];
            lin.g(static_cast<Eigen::Index>(j)) = b.sign * (lin.X[b.k](b.i) - b.bound);
        }
    }

    double violation(const Linearization& lin) const {
        return lin.c.cwiseAbs().sum() + lin.g.cwiseMax(0.0).sum();
    }

    double feasibility(const Linearization& lin) const {
        const double g = lin.g.size() > 0 ? std::max(0.0, lin.g.maxCoeff()) : 0.0;
        return std::max(lin.c.cwiseAbs().maxCoeff(), g);
    }

    double merit(const Linearization& lin) const { return 0.5 * lin.r.squaredNorm() + nu_merit_ * violation(lin); }

    struct Step {
        bool ok{false};
        bool elastic{false};
        Eigen::VectorXd du;
        double grad_dot_du{0.0};
        double lin_violation{0.0};   // l1 violation of the linearized constraints at du
        double multiplier_norm{0.0};  // largest constraint multiplier (plain QP only)
        Eigen::VectorXd eq_mult;
        Eigen::VectorXd state_mult;
    };

    // Gauss-Newton part plus the secant estimate of the remaining Lagrangian curvature, with
    // eigenvalues clipped so the QP stays strictly convex.
    Eigen::MatrixXd hessian(const Linearization& lin) const {
        Eigen::MatrixXd W = lin.J.transpose() * lin.J;
        const double scale = std::max(1.0, W.diagonal().maxCoeff());
        if (curvature_.size() > 0) {
            W += curvature_;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(W);
            const double floor = 1e-6 * scale;
            if (eig.eigenvalues().minCoeff() < floor) {
                W = eig.eigenvectors() * eig.eigenvalues().cwiseMax(floor).asDiagonal() *
                    eig.eigenvectors().transpose();
            }
        }
        W.diagonal().array() += 1e-10 * scale;
        return W;
    }

    // Gradient of f - lambda'c + mu' g with the QP's multiplier sign convention.
    Eigen::VectorXd lagrangian_gradient(const Linearization& lin, const Eigen::VectorXd& lambda,
                                        const Eigen::VectorXd& mu) const {
        Eigen::VectorXd grad = lin.J.transpose() * lin.r - lin.S[N_].transpose() * lambda;
        for (std::size_t j = 0; j < bounds_.size(); ++j) {
            const auto& b = bounds_[j];
            grad += mu(static_cast<Eigen::Index>(j)) * b.sign * lin.S[b.k].row(b.i).transpose();
        }
        return grad;
    }

    // Symmetric rank-one update of the curvature term along the accepted step.
    void update_curvature(const Linearization& before, const Linearization& after, const Eigen::VectorXd& step,
                          const Step& st) {
        if (curvature_.size() == 0) curvature_ = Eigen::MatrixXd::Zero(nu_, nu_);
        const Eigen::VectorXd y = lagrangian_gradient(after, st.eq_mult, st.state_mult) -
                                  lagrangian_gradient(before, st.eq_mult, st.state_mult);
        const Eigen::VectorXd resid = y - after.J.transpose() * (after.J * step) - curvature_ * step;
        const double denom = resid.dot(step);
        if (std::abs(denom) > 1e-8 * resid.norm() * step.norm() && std::abs(denom) > 1e-300) {
            curvature_ += resid * resid.transpose() / denom;
        }
    }


    // Plain QP: min 0.5 du'H du + grad'du  s.t.  C du + c = 0,  G du + g <= 0,  lo <= U + du <= hi.
    // Elastic QP in z = [du, s+, s-, t] adds l1 slacks:
    //   min ... + nu (sum s+ + sum s- + sum t)  s.t.  C du + c = s+ - s-,  G du + g <= t,  s+, s-, t >= 0
    // which is always feasible and gives a descent direction of the merit.
    Step subproblem(const Eigen::VectorXd& U, const Linearization& lin, const Eigen::VectorXd& c,
                    const Eigen::VectorXd& g, bool elastic) const {
        // Fewer inputs than terminal equalities: only the elastic form is well posed.
        if (!elastic && nu_ < n_) return Step{};
        const int nb = static_cast<int>(bounds_.size());
        const int nz = elastic ? nu_ + 2 * n_ + nb : nu_;
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(nz, nz);
        H.topLeftCorner(nu_, nu_) = hessian(lin);
        const double scale = std::max(1.0, H.diagonal().head(nu_).maxCoeff());
        Eigen::VectorXd grad(nz);
        grad.head(nu_) = lin.J.transpose() * lin.r;
        if (elastic) {
            H.diagonal().tail(nz - nu_).array() += 1e-6 * scale;
            grad.tail(nz - nu_).setConstant(nu_merit_);
        }

        const Eigen::MatrixXd& C = lin.S[N_];
        Eigen::MatrixXd CE = Eigen::MatrixXd::Zero(nz, n_);
        CE.topRows(nu_) = C.transpose();
        if (elastic) {
            CE.middleRows(nu_, n_) = -Eigen::MatrixXd::Identity(n_, n_);
            CE.middleRows(nu_ + n_, n_) = Eigen::MatrixXd::Identity(n_, n_);
        }

        const int ni = box_count_ + nb + (elastic ? 2 * n_ + nb : 0);
        Eigen::MatrixXd CI = Eigen::MatrixXd::Zero(nz, ni);
        Eigen::VectorXd ci = Eigen::VectorXd::Zero(ni);
        int col = 0;
        for (int i = 0; i < nu_; ++i) {
            if (std::isfinite(lo_(i))) {
                CI(i, col) = 1.0;
                ci(col++) = U(i) - lo_(i);
            }
            if (std::isfinite(hi_(i))) {
                CI(i, col) = -1.0;
                ci(col++) = hi_(i) - U(i);
            }
        }
        const int first_state_col = col;
        for (int j = 0; j < nb; ++j) {
            const auto& b = bounds_[j];
            CI.col(col).head(nu_) = -b.sign * lin.S[b.k].row(b.i).transpose();
            if (elastic) CI(nu_ + 2 * n_ + j, col) = 1.0;
            ci(col++) = -g(j);
        }
        if (elastic) {
            for (int i = nu_; i < nz; ++i) CI(i, col++) = 1.0;
        }

        const QpResult qp = solve_dense_qp(H, grad, CE, c, CI, ci);
        Step st;
        st.ok = qp.status == QpStatus::kOptimal;
        st.elastic = elastic;
        st.du = qp.x.head(nu_);
        st.grad_dot_du = grad.head(nu_).dot(st.du);
        Eigen::VectorXd g_lin = g;
        for (int j = 0; j < nb; ++j) {
            const auto& b = bounds_[j];
            g_lin(j) += b.sign * lin.S[b.k].row(b.i).dot(st.du);
        }
        st.lin_violation = (c + C * st.du).cwiseAbs().sum() + g_lin.cwiseMax(0.0).sum();
        st.eq_mult = qp.eq_multipliers;
        st.state_mult = qp.ineq_multipliers.segment(first_state_col, nb);
        if (!elastic) {
            st.multiplier_norm = qp.eq_multipliers.size() > 0 ? qp.eq_multipliers.cwiseAbs().maxCoeff() : 0.0;
            if (nb > 0) st.multiplier_norm = std::max(st.multiplier_norm, qp.ineq_multipliers.segment(first_state_col, nb).maxCoeff());
        }
        return st;
    }

    const FixedTerminalProblem& p_;
    const SystemModel& model_;
    const SolverOptions& opt_;
    int N_;
    int n_;
    int m_;
    int nu_;
    int rows_{0};
    int box_count_{0};
    Eigen::VectorXd sqrt2P_;
    Eigen::VectorXd sqrt2R_;
    std::vector<int> cost_state_idx_;
    std::vector<int> cost_input_idx_;
    std::vector<StateBound> bounds_;
    Eigen::VectorXd lo_;
    Eigen::VectorXd hi_;
    double nu_merit_{1.0};
    Eigen::MatrixXd curvature_;
};

}  // namespace

SolveResult solve_fixed_terminal(const FixedTerminalProblem& problem, std::span<const Input> warm_inputs,
                                 const SolverOptions& options) {
    problem.validate();
    ShootingSolver solver(problem, options);
    return solver.solve(warm_inputs);
}

}  // namespace dmpc

// Copyright 2026 The r2plan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "r2plan/error.hpp"
#include "r2plan/mdp.hpp"
#include "r2plan/uncertainty.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace r2plan {

/// Logits theta[s][a] of a softmax policy.
struct SoftmaxPolicyParams {
    Eigen::MatrixXd logits;

    static SoftmaxPolicyParams uniform(int num_states, int num_actions) {
        return {Eigen::MatrixXd::Zero(num_states, num_actions)};
    }

    Policy policy() const {
        detail::require(logits.size() > 0 && logits.allFinite(), "SoftmaxPolicyParams: logits must be finite");
        Eigen::MatrixXd p(logits.rows(), logits.cols());
        for (Eigen::Index s = 0; s < logits.rows(); ++s) {
            const Eigen::RowVectorXd e = (logits.row(s).array() - logits.row(s).maxCoeff()).exp().matrix();
            p.row(s) = e / e.sum();
        }
        return Policy(std::move(p));
    }
};

/// d pi_s(a) / d theta_s(b) = pi_s(a) (1[a = b] - pi_s(b)).
inline Eigen::MatrixXd softmax_jacobian(const Eigen::VectorXd& pi_s) {
    Eigen::MatrixXd jac = -pi_s * pi_s.transpose();
    jac.diagonal() += pi_s;
    return jac;
}

struct GradientReport {
    double objective = 0.0;
    Eigen::MatrixXd gradient;
    std::optional<double> fd_max_rel_error;
};

namespace detail {

inline const BallUncertainty& reward_only(const Uncertainty& unc, const TabularMdp& mdp) {
    const auto* b = std::get_if<BallUncertainty>(&unc);
    if (!b) throw UnsupportedConfig("reward-robust policy gradient needs an s-rectangular ball");
    b->validate(mdp.num_states());
    if ((b->alpha_p.array() != 0.0).any())
        throw UnsupportedConfig("reward-robust policy gradient needs alpha_p = 0: with transition "
                                "uncertainty the regularizer depends on the value itself");
    if (b->norm_order != NormOrder::L2)
        throw UnsupportedConfig("reward-robust policy gradient is implemented for l2 balls");
    return *b;
}

inline void check_params(const TabularMdp& mdp, const SoftmaxPolicyParams& params) {
    require(params.logits.rows() == mdp.num_states() && params.logits.cols() == mdp.num_actions(),
            "policy logits shape does not match the MDP");
}

// v^{pi,U} by one linear solve: (I - gamma P^pi) v = r^pi - alpha_r ||pi_s||_2.
inline ValueFn reward_robust_value(const TabularMdp& mdp, const BallUncertainty& unc, const Policy& pi) {
    const Eigen::VectorXd rhs =
        policy_reward(mdp, pi) - unc.alpha_r.cwiseProduct(pi.probs().rowwise().norm());
    return solve_policy_system(mdp, pi, rhs);
}

} // namespace detail

/// J_U(pi) = <v^{pi,U}, mu0> for a reward-only l2 ball.
inline double reward_robust_objective(const TabularMdp& mdp, const Uncertainty& unc, const SoftmaxPolicyParams& params) {
    const auto& ball = detail::reward_only(unc, mdp);
    detail::check_params(mdp, params);
    return detail::reward_robust_value(mdp, ball, params.policy()).dot(mdp.initial_dist());
}

/**
 * Exact gradient of J_U with respect to the logits, in occupancy form:
 * dJ/dtheta_s = d(s) sum_a dpi_s(a)/dtheta_s (q^{pi,U}(s,a) - alpha_r[s] pi_s(a)/||pi_s||),
 * with d = mu0^T (I - gamma P0^pi)^{-1}.
 */
inline GradientReport reward_robust_gradient(const TabularMdp& mdp, const Uncertainty& unc,
                                             const SoftmaxPolicyParams& params) {
    const auto& ball = detail::reward_only(unc, mdp);
    detail::check_params(mdp, params);
    const Policy pi = params.policy();
    const ValueFn v = detail::reward_robust_value(mdp, ball, pi);
    const QFn q = q_from_v(mdp, v);
    const Eigen::VectorXd d = occupancy(mdp, pi).state_weights;

    GradientReport rep;
    rep.objective = v.dot(mdp.initial_dist());
    rep.gradient.resize(mdp.num_states(), mdp.num_actions());
    for (int s = 0; s < mdp.num_states(); ++s) {
        const Eigen::VectorXd pi_s = pi.row(s).transpose();
        const Eigen::VectorXd adjusted = q.row(s).transpose() - (ball.alpha_r(s) / pi_s.norm()) * pi_s;
        // softmax Jacobian is symmetric, so J^T w = pi .* (w - <pi, w>)
        rep.gradient.row(s) = d(s) * (pi_s.array() * (adjusted.array() - pi_s.dot(adjusted))).matrix().transpose();
    }
    return rep;
}

/// Central finite differences of reward_robust_objective with step h.
inline Eigen::MatrixXd finite_difference_gradient(const TabularMdp& mdp, const Uncertainty& unc,
                                                  const SoftmaxPolicyParams& params, double h = 1e-6) {
    Eigen::MatrixXd g(params.logits.rows(), params.logits.cols());
    SoftmaxPolicyParams probe = params;
    for (Eigen::Index s = 0; s < g.rows(); ++s) {
        for (Eigen::Index a = 0; a < g.cols(); ++a) {
            const double orig = probe.logits(s, a);
            probe.logits(s, a) = orig + h;
            const double up = reward_robust_objective(mdp, unc, probe);
            probe.logits(s, a) = orig - h;
            const double down = reward_robust_objective(mdp, unc, probe);
            probe.logits(s, a) = orig;
            g(s, a) = (up - down) / (2.0 * h);
        }
    }
    return g;
}

/// Entries below this magnitude are compared in absolute rather than relative terms.
inline constexpr double kRelErrorFloor = 1e-3;

/// max_i |a_i - b_i| / max(|a_i|, |b_i|, kRelErrorFloor).
inline double max_relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    detail::require(a.rows() == b.rows() && a.cols() == b.cols(), "max_relative_error: shape mismatch");
    const Eigen::ArrayXXd denom = a.array().abs().max(b.array().abs()).max(kRelErrorFloor);
    return ((a - b).array().abs() / denom).maxCoeff();
}

/// reward_robust_gradient with fd_max_rel_error filled in.
inline GradientReport gradient_check(const TabularMdp& mdp, const Uncertainty& unc, const SoftmaxPolicyParams& params,
                                     double h = 1e-6) {
    GradientReport rep = reward_robust_gradient(mdp, unc, params);
    rep.fd_max_rel_error = max_relative_error(rep.gradient, finite_difference_gradient(mdp, unc, params, h));
    return rep;
}

struct PgTrainResult {
    SoftmaxPolicyParams params;
    std::vector<double> objective_trace; ///< J before each step and after the last one
    std::vector<double> gradient_norms;  ///< Frobenius norm of the gradient used at each step
};

/// Full-gradient ascent on the logits.
inline PgTrainResult pg_train(const TabularMdp& mdp, const Uncertainty& unc, SoftmaxPolicyParams init,
                              double learning_rate, int steps) {
    detail::require(learning_rate > 0.0, "pg_train: learning_rate must be positive");
    detail::require(steps >= 0, "pg_train: steps must be nonnegative");
    PgTrainResult out{std::move(init), {}, {}};
    out.objective_trace.reserve(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k) {
        GradientReport g;
        try {
            g = reward_robust_gradient(mdp, unc, out.params);
        } catch (const NumericError& e) {
            throw NumericError("pg_train: step " + std::to_string(k) + ": " + e.what());
        }
        if (!std::isfinite(g.objective) || !g.gradient.allFinite())
            throw NumericError("pg_train: non-finite objective or gradient at step " + std::to_string(k));
        out.objective_trace.push_back(g.objective);
        if (k == steps) break;
        out.gradient_norms.push_back(g.gradient.norm());
        out.params.logits += learning_rate * g.gradient;
    }
    return out;
}

} // namespace r2plan

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
#include "r2plan/norms.hpp"
#include "r2plan/uncertainty.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

namespace r2plan {

/// How the s-rectangular greedy step max_pi <pi, q> - kappa ||pi||_2 is solved.
enum class GreedySolver {
    Threshold,        ///< exact: pi proportional to (q - lambda)_+ with sum (q - lambda)_+^2 = kappa^2
    ProjectedAscent,  ///< projected gradient ascent with backtracking
};

struct R2Config {
    Uncertainty uncertainty = BallUncertainty{};
    double greedy_tolerance = 1e-8;
    int greedy_max_iters = 10000;
    double greedy_step_size = 0.1;
    GreedySolver solver = GreedySolver::Threshold;

    void validate(const TabularMdp& mdp) const {
        validate_uncertainty(uncertainty, mdp);
        detail::require(greedy_tolerance > 0.0, "R2Config: greedy_tolerance must be positive");
        detail::require(greedy_step_size > 0.0, "R2Config: greedy_step_size must be positive");
        detail::require(greedy_max_iters > 0, "R2Config: greedy_max_iters must be positive");
    }
};

/// Projected ascent ran out of iterations. Carries the last iterate.
class GreedyIterationLimit : public Error {
public:
    GreedyIterationLimit(int state, Eigen::VectorXd last)
        : Error("r2_greedy: projected ascent did not converge at state " + std::to_string(state)),
          state_(state), last_iterate_(std::move(last)) {}
    int state() const noexcept { return state_; }
    const Eigen::VectorXd& last_iterate() const noexcept { return last_iterate_; }

private:
    int state_;
    Eigen::VectorXd last_iterate_;
};

/**
 * Omega_{v,R2}(pi_s).
 *
 * s-rectangular: ||pi_s||_* (alpha_r[s] + gamma alpha_p[s] ||v||_*).
 * (s,a)-rectangular: sum_a pi_s(a) (alpha_r[s][a] + gamma alpha_p[s][a] ||v||_*).
 */
inline double r2_regularizer(const R2Config& cfg, int s, const Eigen::VectorXd& pi_s, const ValueFn& v,
                             double gamma) {
    if (const auto* b = std::get_if<BallUncertainty>(&cfg.uncertainty)) {
        const NormOrder q = dual(b->norm_order);
        return lp_norm(pi_s, q) * (b->alpha_r(s) + gamma * b->alpha_p(s) * lp_norm(v, q));
    }
    const auto& sa = std::get<SaBallUncertainty>(cfg.uncertainty);
    const double vnorm = lp_norm(v, dual(sa.norm_order));
    return pi_s.dot((sa.alpha_r.row(s) + gamma * vnorm * sa.alpha_p.row(s)).transpose());
}

/// [T^{pi,R2} v](s) = T^pi v(s) - Omega_{v,R2}(pi_s).
inline ValueFn r2_eval_apply(const TabularMdp& mdp, const R2Config& cfg, const Policy& pi, const ValueFn& v) {
    validate_uncertainty(cfg.uncertainty, mdp);
    ValueFn out = bellman_eval_apply(mdp, pi, v);
    for (int s = 0; s < mdp.num_states(); ++s)
        out(s) -= r2_regularizer(cfg, s, pi.row(s).transpose(), v, mdp.discount());
    return out;
}

namespace detail {

inline Eigen::VectorXd unit_at_argmax(const Eigen::VectorXd& q) {
    Eigen::Index best = 0;
    for (Eigen::Index a = 1; a < q.size(); ++a) {
        if (q(a) > q(best)) best = a;
    }
    Eigen::VectorXd pi = Eigen::VectorXd::Zero(q.size());
    pi(best) = 1.0;
    return pi;
}

inline std::vector<int> decreasing_order(const Eigen::VectorXd& q) {
    std::vector<int> order(static_cast<std::size_t>(q.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return q(a) > q(b); });
    return order;
}

// argmax <pi,q> - kappa ||pi||_2. On the support pi = (q - lambda)/sum, and
// stationarity forces sum_a (q_a - lambda)_+^2 = kappa^2. Offsets from the
// maximum keep the quadratic well conditioned.
inline Eigen::VectorXd l2_threshold_greedy(const Eigen::VectorXd& q, double kappa) {
    const auto n = static_cast<int>(q.size());
    if (kappa <= 0.0) return unit_at_argmax(q);
    const auto order = decreasing_order(q);
    const double top = q(order[0]);
    std::vector<double> gap(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) gap[static_cast<std::size_t>(i)] = top - q(order[static_cast<std::size_t>(i)]);

    const double k2 = kappa * kappa;
    int k = 1;
    for (int cand = 2; cand <= n; ++cand) {
        double f = 0.0;
        for (int i = 0; i < cand - 1; ++i) {
            const double d = gap[static_cast<std::size_t>(cand - 1)] - gap[static_cast<std::size_t>(i)];
            f += d * d;
        }
        if (f <= k2) k = cand; else break;
    }
    double mean = 0.0;
    for (int i = 0; i < k; ++i) mean += gap[static_cast<std::size_t>(i)];
    mean /= k;
    double m2 = 0.0;
    for (int i = 0; i < k; ++i) {
        const double d = gap[static_cast<std::size_t>(i)] - mean;
        m2 += d * d;
    }
    const double u = mean + std::sqrt(std::max(0.0, k2 - m2) / k);
    Eigen::VectorXd pi = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < k; ++i)
        pi(order[static_cast<std::size_t>(i)]) = std::max(0.0, u - gap[static_cast<std::size_t>(i)]);
    const double total = pi.sum();
    if (!(total > 0.0)) return unit_at_argmax(q);
    return pi / total;
}

// argmax <pi,q> - kappa max_a pi(a): optimal points are uniform over a top-k set.
inline Eigen::VectorXd linf_greedy(const Eigen::VectorXd& q, double kappa) {
    const auto order = decreasing_order(q);
    double best_val = -std::numeric_limits<double>::infinity();
    int best_k = 1;
    double prefix = 0.0;
    for (std::size_t k = 1; k <= order.size(); ++k) {
        prefix += q(order[k - 1]);
        const double val = (prefix - kappa) / static_cast<double>(k);
        if (val > best_val) {
            best_val = val;
            best_k = static_cast<int>(k);
        }
    }
    Eigen::VectorXd pi = Eigen::VectorXd::Zero(q.size());
    for (int i = 0; i < best_k; ++i) pi(order[static_cast<std::size_t>(i)]) = 1.0 / best_k;
    return pi;
}

inline Eigen::VectorXd l2_projected_ascent(const Eigen::VectorXd& q, double kappa, const R2Config& cfg,
                                           int state) {
    const auto n = q.size();
    auto objective = [&](const Eigen::VectorXd& pi) { return pi.dot(q) - kappa * pi.norm(); };
    Eigen::VectorXd pi = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    double f = objective(pi);
    double step = cfg.greedy_step_size;
    for (int it = 0; it < cfg.greedy_max_iters; ++it) {
        const Eigen::VectorXd grad = q - kappa * pi / pi.norm();
        Eigen::VectorXd next = project_simplex(pi + step * grad);
        double f_next = objective(next);
        // backtracking: halve until the objective does not decrease
        while (f_next < f && step > 1e-300) {
            step *= 0.5;
            next = project_simplex(pi + step * grad);
            f_next = objective(next);
        }
        const double move = (next - pi).cwiseAbs().maxCoeff();
        pi = std::move(next);
        f = f_next;
        if (move < cfg.greedy_tolerance) return pi;
    }
    throw GreedyIterationLimit(state, pi);
}

} // namespace detail

/**
 * Maximizer over the simplex of <pi, q_s> - kappa ||pi||_{dual_order} at a single state.
 * kappa = 0 gives the deterministic argmax (lowest index on ties).
 */
inline Eigen::VectorXd r2_state_greedy(const Eigen::VectorXd& q_s, double kappa, NormOrder dual_order,
                                       const R2Config& cfg, int state = 0) {
    detail::require(q_s.size() > 0 && q_s.allFinite(), "r2_state_greedy: q_s must be finite and nonempty");
    detail::require(kappa >= 0.0, "r2_state_greedy: kappa must be nonnegative");
    if (kappa == 0.0) return detail::unit_at_argmax(q_s);
    switch (dual_order) {
    case NormOrder::L1: return detail::unit_at_argmax(q_s); // ||pi||_1 = 1 on the simplex
    case NormOrder::Linf: return detail::linf_greedy(q_s, kappa);
    case NormOrder::L2:
        if (cfg.solver == GreedySolver::ProjectedAscent) return detail::l2_projected_ascent(q_s, kappa, cfg, state);
        return detail::l2_threshold_greedy(q_s, kappa);
    }
    return {};
}

/// G_{Omega_R2}(v): per-state maximizer of T^{pi,R2} v(s).
inline Policy r2_greedy(const TabularMdp& mdp, const R2Config& cfg, const ValueFn& v) {
    cfg.validate(mdp);
    const QFn q = q_from_v(mdp, v);
    const double gamma = mdp.discount();
    Eigen::MatrixXd probs(mdp.num_states(), mdp.num_actions());
    if (const auto* b = std::get_if<BallUncertainty>(&cfg.uncertainty)) {
        const NormOrder dq = dual(b->norm_order);
        const double vnorm = lp_norm(v, dq);
        for (int s = 0; s < mdp.num_states(); ++s) {
            const double kappa = b->alpha_r(s) + gamma * b->alpha_p(s) * vnorm;
            probs.row(s) = r2_state_greedy(q.row(s).transpose(), kappa, dq, cfg, s).transpose();
        }
    } else {
        // closed form: deterministic argmax of r0 - alpha_r + gamma(<P0, v> - alpha_p ||v||)
        const auto& sa = std::get<SaBallUncertainty>(cfg.uncertainty);
        const double vnorm = lp_norm(v, dual(sa.norm_order));
        const QFn scores = q - sa.alpha_r - gamma * vnorm * sa.alpha_p;
        return greedy_from_q(scores);
    }
    return Policy(std::move(probs));
}

/// T^{*,R2} v and its greedy policy.
inline ValuePolicy r2_opt_apply(const TabularMdp& mdp, const R2Config& cfg, const ValueFn& v) {
    Policy pi = r2_greedy(mdp, cfg, v);
    ValueFn value = r2_eval_apply(mdp, cfg, pi, v);
    return {std::move(value), std::move(pi)};
}

} // namespace r2plan

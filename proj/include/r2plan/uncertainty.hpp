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
#include "r2plan/regularizers.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <variant>

namespace r2plan {

/**
 * s-rectangular ball uncertainty around the nominal model: at each state s the
 * reward perturbation r_s in R^A satisfies ||r_s||_p <= alpha_r[s] and the
 * transition perturbation P_s in R^{S x A} satisfies ||P_s||_p <= alpha_p[s]
 * (entries taken as a flat vector). Perturbed kernels are not forced back
 * onto the simplex.
 */
struct BallUncertainty {
    Eigen::VectorXd alpha_r;
    Eigen::VectorXd alpha_p;
    NormOrder norm_order = NormOrder::L2;

    static BallUncertainty uniform(int num_states, double alpha_r, double alpha_p,
                                   NormOrder p = NormOrder::L2) {
        return {Eigen::VectorXd::Constant(num_states, alpha_r),
                Eigen::VectorXd::Constant(num_states, alpha_p), p};
    }

    void validate(int num_states) const {
        detail::require(alpha_r.size() == num_states && alpha_p.size() == num_states,
                        "BallUncertainty: radii must have one entry per state");
        detail::require(alpha_r.allFinite() && alpha_p.allFinite() && (alpha_r.array() >= 0.0).all() &&
                            (alpha_p.array() >= 0.0).all(),
                        "BallUncertainty: radii must be finite and nonnegative");
    }
};

/// (s,a)-rectangular variant: |r(s,a)| <= alpha_r[s][a], ||P(.|s,a)||_p <= alpha_p[s][a].
struct SaBallUncertainty {
    Eigen::MatrixXd alpha_r;
    Eigen::MatrixXd alpha_p;
    NormOrder norm_order = NormOrder::L2;

    static SaBallUncertainty uniform(int num_states, int num_actions, double alpha_r, double alpha_p,
                                     NormOrder p = NormOrder::L2) {
        return {Eigen::MatrixXd::Constant(num_states, num_actions, alpha_r),
                Eigen::MatrixXd::Constant(num_states, num_actions, alpha_p), p};
    }

    void validate(int num_states, int num_actions) const {
        detail::require(alpha_r.rows() == num_states && alpha_r.cols() == num_actions &&
                            alpha_p.rows() == num_states && alpha_p.cols() == num_actions,
                        "SaBallUncertainty: radii must be S x A");
        detail::require(alpha_r.allFinite() && alpha_p.allFinite() && (alpha_r.array() >= 0.0).all() &&
                            (alpha_p.array() >= 0.0).all(),
                        "SaBallUncertainty: radii must be finite and nonnegative");
    }
};

using Uncertainty = std::variant<BallUncertainty, SaBallUncertainty>;

inline NormOrder norm_order_of(const Uncertainty& u) {
    return std::visit([](const auto& x) { return x.norm_order; }, u);
}

inline void validate_uncertainty(const Uncertainty& u, const TabularMdp& mdp) {
    if (const auto* b = std::get_if<BallUncertainty>(&u))
        b->validate(mdp.num_states());
    else
        std::get<SaBallUncertainty>(u).validate(mdp.num_states(), mdp.num_actions());
}

/// sigma_B(y) for the radius ball of order p: radius * ||y||_{p*}.
template <typename Derived>
double ball_support(double radius, const Eigen::DenseBase<Derived>& y, NormOrder p) {
    detail::require(radius >= 0.0, "ball_support: negative radius");
    return radius * lp_norm(y, dual(p));
}

/// sigma_{R_s}(-pi_s) = alpha_r[s] ||pi_s||_*.
inline double reward_support(const BallUncertainty& unc, int s, const Eigen::VectorXd& pi_s) {
    return ball_support(unc.alpha_r(s), pi_s, unc.norm_order);
}

/// The matrix [v . pi_s](s', a) = v(s') pi_s(a).
inline Eigen::MatrixXd value_policy_outer(const ValueFn& v, const Eigen::VectorXd& pi_s) {
    return v * pi_s.transpose();
}

/// sigma_{P_s}(-gamma v . pi_s) = gamma alpha_p[s] ||v||_* ||pi_s||_*.
inline double transition_support(const BallUncertainty& unc, int s, const Eigen::VectorXd& pi_s,
                                 const ValueFn& v, double gamma) {
    const NormOrder q = dual(unc.norm_order);
    return gamma * unc.alpha_p(s) * lp_norm(v, q) * lp_norm(pi_s, q);
}

/// Policy-dependent interval reward set: R_{s,a} = [lower(s,a), +inf).
struct IntervalRewardSet {
    RegularizerKind kind;
    Eigen::MatrixXd lower;
};

/**
 * Lower endpoints that recover a regularizer: ln(1/pi) for Shannon, ln d + ln(1/pi)
 * for KL and (1 - pi)/2 for Tsallis. Shannon/KL need a strictly positive pi_s.
 */
inline Eigen::VectorXd interval_lower_endpoints(const RegularizerKind& kind, const Eigen::VectorXd& pi_s) {
    detail::check_kind_dims(kind, pi_s.size());
    switch (kind.family()) {
    case RegularizerFamily::NegTsallis: return ((1.0 - pi_s.array()) / 2.0).matrix();
    case RegularizerFamily::NegShannon:
    case RegularizerFamily::KL: {
        if (!(pi_s.array() > 0.0).all())
            throw InvalidInput("interval reward set: entropy intervals need a strictly positive policy");
        Eigen::VectorXd lo = -pi_s.array().log().matrix();
        if (kind.family() == RegularizerFamily::KL) lo.array() += kind.reference().array().log();
        return lo;
    }
    }
    return {};
}

inline IntervalRewardSet make_interval_set(const RegularizerKind& kind, const Policy& pi) {
    IntervalRewardSet set{kind, Eigen::MatrixXd(pi.num_states(), pi.num_actions())};
    for (int s = 0; s < pi.num_states(); ++s)
        set.lower.row(s) = interval_lower_endpoints(kind, pi.row(s).transpose()).transpose();
    return set;
}

/// sigma_{R_s}(-pi_s) = max_{r >= lower} -<r, pi_s> = -<lower_s, pi_s> for pi_s >= 0.
inline double interval_support(const IntervalRewardSet& set, int s, const Eigen::VectorXd& pi_s) {
    detail::require(s >= 0 && s < set.lower.rows(), "interval_support: state out of range");
    detail::require(pi_s.size() == set.lower.cols(), "interval_support: action count mismatch");
    detail::require((pi_s.array() >= 0.0).all(), "interval_support: pi_s must be nonnegative");
    double acc = 0.0;
    for (Eigen::Index a = 0; a < pi_s.size(); ++a) {
        if (pi_s(a) > 0.0) acc -= set.lower(s, a) * pi_s(a);
    }
    return acc;
}

inline double default_asm1_epsilon(double gamma) { return 0.01 * (1.0 - gamma); }

/**
 * Largest transition radius at s allowed by the bounded-radius condition:
 * min((1 - gamma - eps)/(gamma |S|^{1/q}), min_{a,s'} P0(s'|s,a)). The second
 * term is the minimum of u^T P0(.|s,.) v over nonnegative unit vectors, attained
 * at coordinate vectors.
 */
inline double asm1_radius_bound(const TabularMdp& mdp, int s, double epsilon,
                                NormOrder p = NormOrder::L2) {
    const double gamma = mdp.discount();
    if (!(epsilon > 0.0 && epsilon < 1.0 - gamma))
        throw InvalidInput("asm1_radius_bound: epsilon must lie in (0, 1 - gamma)");
    detail::require(s >= 0 && s < mdp.num_states(), "asm1_radius_bound: state out of range");
    const double n_pow = std::pow(static_cast<double>(mdp.num_states()), inverse_exponent(dual(p)));
    const double contraction_term = (1.0 - gamma - epsilon) / (gamma * n_pow);
    return std::min(contraction_term, mdp.kernel_slice(s).minCoeff());
}

/// Per-state bounds and whether the configured transition radii respect them.
struct Asm1Check {
    bool satisfied = false;
    double epsilon = 0.0;
    Eigen::VectorXd bounds;
};

inline Asm1Check check_asm1(const TabularMdp& mdp, const Uncertainty& unc, double epsilon) {
    validate_uncertainty(unc, mdp);
    const NormOrder p = norm_order_of(unc);
    Asm1Check out{true, epsilon, Eigen::VectorXd(mdp.num_states())};
    for (int s = 0; s < mdp.num_states(); ++s) {
        out.bounds(s) = asm1_radius_bound(mdp, s, epsilon, p);
        const double radius = std::holds_alternative<BallUncertainty>(unc)
                                  ? std::get<BallUncertainty>(unc).alpha_p(s)
                                  : std::get<SaBallUncertainty>(unc).alpha_p.row(s).maxCoeff();
        if (radius > out.bounds(s)) out.satisfied = false;
    }
    return out;
}

/**
 * min u^T M v over nonnegative unit-l2 u, v, found numerically: alternating
 * coordinate minimization from random starts, plus every vertex pair.
 */
inline double bilinear_min_numeric(const Eigen::MatrixXd& m, int restarts, std::uint64_t seed = 0) {
    detail::require(m.size() > 0, "bilinear_min_numeric: empty matrix");
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) best = std::min(best, m(i, j));

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int r = 0; r < restarts; ++r) {
        Eigen::VectorXd u = Eigen::VectorXd::NullaryExpr(m.rows(), [&] { return unif(rng); });
        Eigen::VectorXd v = Eigen::VectorXd::NullaryExpr(m.cols(), [&] { return unif(rng); });
        u.normalize();
        v.normalize();
        double val = u.dot(m * v);
        for (int it = 0; it < 100; ++it) {
            Eigen::Index k = 0;
            (m * v).minCoeff(&k);
            u.setZero();
            u(k) = 1.0;
            (m.transpose() * u).minCoeff(&k);
            v.setZero();
            v(k) = 1.0;
            const double next = u.dot(m * v);
            const bool stalled = next >= val;
            val = std::min(val, next);
            if (stalled) break;
        }
        best = std::min(best, val);
    }
    return best;
}

} // namespace r2plan

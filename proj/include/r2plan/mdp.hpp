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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace r2plan {

/// State-indexed values v[s].
using ValueFn = Eigen::VectorXd;
/// State-action values q[s][a].
using QFn = Eigen::MatrixXd;

/// Tolerance on row sums of stochastic vectors. Inputs outside it are rejected, not renormalized.
inline constexpr double kStochasticTol = 1e-12;

namespace detail {

template <typename Derived>
bool is_distribution(const Eigen::MatrixBase<Derived>& row, double tol = kStochasticTol) {
    return row.allFinite() && (row.array() >= 0.0).all() && std::abs(row.sum() - 1.0) <= tol;
}

inline std::string shape(Eigen::Index r, Eigen::Index c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

} // namespace detail

/**
 * Nominal finite MDP (P0, r0, gamma, mu0).
 *
 * The kernel is stored densely as an (S*A) x S matrix whose row s*A + a is
 * P0(.|s,a). The object is immutable once constructed.
 */
class TabularMdp {
public:
    TabularMdp(Eigen::MatrixXd transition, Eigen::MatrixXd reward, double discount,
               Eigen::VectorXd initial_dist)
        : transition_(std::move(transition)), reward_(std::move(reward)), discount_(discount),
          initial_dist_(std::move(initial_dist)) {
        const auto S = reward_.rows();
        const auto A = reward_.cols();
        detail::require(S > 0 && A > 0, "TabularMdp: need at least one state and one action");
        detail::require(transition_.rows() == S * A && transition_.cols() == S,
                        "TabularMdp: transition must be " + detail::shape(S * A, S) + ", got " +
                            detail::shape(transition_.rows(), transition_.cols()));
        detail::require(initial_dist_.size() == S, "TabularMdp: initial_dist has wrong length");
        detail::require(discount_ > 0.0 && discount_ < 1.0,
                        "TabularMdp: discount must lie in (0,1), got " + std::to_string(discount_));
        detail::require(reward_.allFinite(), "TabularMdp: reward has non-finite entries");
        for (Eigen::Index row = 0; row < transition_.rows(); ++row) {
            if (!detail::is_distribution(transition_.row(row)))
                throw InvalidInput("TabularMdp: transition row (s=" + std::to_string(row / A) +
                                   ", a=" + std::to_string(row % A) + ") is not a distribution");
        }
        detail::require(detail::is_distribution(initial_dist_.transpose()),
                        "TabularMdp: initial_dist is not a distribution");
    }

    int num_states() const noexcept { return static_cast<int>(reward_.rows()); }
    int num_actions() const noexcept { return static_cast<int>(reward_.cols()); }
    double discount() const noexcept { return discount_; }

    /// (S*A) x S kernel, row s*A + a.
    const Eigen::MatrixXd& transition() const noexcept { return transition_; }
    const Eigen::MatrixXd& reward() const noexcept { return reward_; }
    const Eigen::VectorXd& initial_dist() const noexcept { return initial_dist_; }

    double prob(int s, int a, int next) const { return transition_(row_index(s, a), next); }
    auto kernel_row(int s, int a) const { return transition_.row(row_index(s, a)); }
    /// P0(.|s,.) as an A x S block.
    auto kernel_slice(int s) const {
        return transition_.middleRows(static_cast<Eigen::Index>(s) * num_actions(), num_actions());
    }

    Eigen::Index row_index(int s, int a) const noexcept {
        return static_cast<Eigen::Index>(s) * num_actions() + a;
    }

    bool operator==(const TabularMdp& o) const {
        return discount_ == o.discount_ && transition_ == o.transition_ && reward_ == o.reward_ &&
               initial_dist_ == o.initial_dist_;
    }

private:
    Eigen::MatrixXd transition_;
    Eigen::MatrixXd reward_;
    double discount_;
    Eigen::VectorXd initial_dist_;
};

/// Row-stochastic map pi[s][a].
class Policy {
public:
    explicit Policy(Eigen::MatrixXd probs) : probs_(std::move(probs)) {
        detail::require(probs_.rows() > 0 && probs_.cols() > 0, "Policy: empty matrix");
        for (Eigen::Index s = 0; s < probs_.rows(); ++s) {
            if (!detail::is_distribution(probs_.row(s)))
                throw InvalidInput("Policy: row " + std::to_string(s) + " is not a distribution");
        }
    }

    static Policy uniform(int num_states, int num_actions) {
        return Policy(Eigen::MatrixXd::Constant(num_states, num_actions, 1.0 / num_actions));
    }

    static Policy deterministic(const std::vector<int>& actions, int num_actions) {
        Eigen::MatrixXd p = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(actions.size()), num_actions);
        for (std::size_t s = 0; s < actions.size(); ++s) {
            detail::require(actions[s] >= 0 && actions[s] < num_actions, "Policy: action out of range");
            p(static_cast<Eigen::Index>(s), actions[s]) = 1.0;
        }
        return Policy(std::move(p));
    }

    int num_states() const noexcept { return static_cast<int>(probs_.rows()); }
    int num_actions() const noexcept { return static_cast<int>(probs_.cols()); }
    const Eigen::MatrixXd& probs() const noexcept { return probs_; }
    auto row(int s) const { return probs_.row(s); }
    double operator()(int s, int a) const { return probs_(s, a); }

    /// Every row carries a single unit entry.
    bool is_deterministic(double tol = 1e-12) const {
        for (Eigen::Index s = 0; s < probs_.rows(); ++s) {
            if (probs_.row(s).maxCoeff() < 1.0 - tol) return false;
        }
        return true;
    }

    bool operator==(const Policy& o) const { return probs_ == o.probs_; }

private:
    Eigen::MatrixXd probs_;
};

/// Discounted visitation: d[s] and mu[s][a] = d[s] * pi[s][a].
struct OccupancyMeasure {
    Eigen::VectorXd state_weights;
    Eigen::MatrixXd state_action;
};

/// A value together with the (greedy) policy that produced it.
struct ValuePolicy {
    ValueFn value;
    Policy policy;
};

namespace detail {

inline void check_policy(const TabularMdp& mdp, const Policy& pi) {
    require(pi.num_states() == mdp.num_states() && pi.num_actions() == mdp.num_actions(),
            "policy shape " + shape(pi.num_states(), pi.num_actions()) + " does not match MDP " +
                shape(mdp.num_states(), mdp.num_actions()));
}

inline void check_value(const TabularMdp& mdp, const ValueFn& v) {
    require(v.size() == mdp.num_states(), "value function length " + std::to_string(v.size()) +
                                              " does not match " + std::to_string(mdp.num_states()) +
                                              " states");
}

} // namespace detail

/// q(s,a) = r0(s,a) + gamma <P0(.|s,a), v>.
inline QFn q_from_v(const TabularMdp& mdp, const ValueFn& v) {
    detail::check_value(mdp, v);
    const Eigen::VectorXd next = mdp.transition() * v;
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const Eigen::Map<const RowMajor> next_sa(next.data(), mdp.num_states(), mdp.num_actions());
    return mdp.reward() + mdp.discount() * next_sa;
}

/// r^pi(s) = sum_a pi(s,a) r0(s,a).
inline Eigen::VectorXd policy_reward(const TabularMdp& mdp, const Policy& pi) {
    detail::check_policy(mdp, pi);
    return pi.probs().cwiseProduct(mdp.reward()).rowwise().sum();
}

/// P^pi(s,s') = sum_a pi(s,a) P0(s'|s,a).
inline Eigen::MatrixXd policy_kernel(const TabularMdp& mdp, const Policy& pi) {
    detail::check_policy(mdp, pi);
    const int S = mdp.num_states();
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(S, S);
    for (int s = 0; s < S; ++s) k.row(s) = pi.row(s) * mdp.kernel_slice(s);
    return k;
}

/// T^pi v = r^pi + gamma P^pi v.
inline ValueFn bellman_eval_apply(const TabularMdp& mdp, const Policy& pi, const ValueFn& v) {
    detail::check_policy(mdp, pi);
    return pi.probs().cwiseProduct(q_from_v(mdp, v)).rowwise().sum();
}

/// Greedy deterministic policy for a q-table, ties to the lowest action index.
inline Policy greedy_from_q(const QFn& q) {
    std::vector<int> actions(static_cast<std::size_t>(q.rows()));
    for (Eigen::Index s = 0; s < q.rows(); ++s) {
        Eigen::Index best = 0;
        for (Eigen::Index a = 1; a < q.cols(); ++a) {
            if (q(s, a) > q(s, best)) best = a;
        }
        actions[static_cast<std::size_t>(s)] = static_cast<int>(best);
    }
    return Policy::deterministic(actions, static_cast<int>(q.cols()));
}

/// T v = max_a q(.,a) together with its greedy policy.
inline ValuePolicy bellman_opt_apply(const TabularMdp& mdp, const ValueFn& v) {
    const QFn q = q_from_v(mdp, v);
    return {q.rowwise().maxCoeff(), greedy_from_q(q)};
}

/**
 * Solves (I - gamma P^pi) v = rhs with a partial-pivot LU.
 *
 * Throws NumericError when the residual exceeds 1e-9 (relative to max(1, |rhs|)).
 */
inline ValueFn solve_policy_system(const TabularMdp& mdp, const Policy& pi, const Eigen::VectorXd& rhs) {
    const int S = mdp.num_states();
    detail::require(rhs.size() == S, "solve_policy_system: rhs has wrong length");
    const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(S, S) - mdp.discount() * policy_kernel(mdp, pi);
    ValueFn v = m.partialPivLu().solve(rhs);
    const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
    if (!v.allFinite() || (m * v - rhs).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw NumericError("solve_policy_system: linear solve failed");
    return v;
}

/// v^pi = (I - gamma P^pi)^{-1} r^pi.
inline ValueFn exact_policy_value(const TabularMdp& mdp, const Policy& pi) {
    return solve_policy_system(mdp, pi, policy_reward(mdp, pi));
}

/// d^T (I - gamma P^pi) = mu0^T, mu[s][a] = d[s] pi[s][a].
inline OccupancyMeasure occupancy(const TabularMdp& mdp, const Policy& pi) {
    const int S = mdp.num_states();
    const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(S, S) - mdp.discount() * policy_kernel(mdp, pi);
    const Eigen::MatrixXd mt = m.transpose();
    Eigen::VectorXd d = mt.partialPivLu().solve(mdp.initial_dist());
    if (!d.allFinite() || (mt * d - mdp.initial_dist()).cwiseAbs().maxCoeff() > 1e-9)
        throw NumericError("occupancy: linear solve failed");
    d = d.cwiseMax(0.0);
    OccupancyMeasure occ;
    occ.state_action = d.asDiagonal() * pi.probs();
    occ.state_weights = std::move(d);
    return occ;
}

} // namespace r2plan

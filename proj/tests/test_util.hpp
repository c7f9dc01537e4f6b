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

#include "r2plan/r2plan.hpp"

#include <Eigen/Dense>

#include <random>

namespace r2plan::testing {

inline Eigen::VectorXd random_simplex(int n, std::mt19937_64& rng, bool strictly_positive = true) {
    std::exponential_distribution<double> expo(1.0);
    Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(n, [&] { return expo(rng); });
    if (strictly_positive) x.array() += 1e-3;
    return x / x.sum();
}

inline Policy random_policy(int S, int A, std::mt19937_64& rng) {
    Eigen::MatrixXd p(S, A);
    for (int s = 0; s < S; ++s) p.row(s) = random_simplex(A, rng).transpose();
    return Policy(p);
}

inline Eigen::VectorXd random_vector(int n, double lo, double hi, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(lo, hi);
    return Eigen::VectorXd::NullaryExpr(n, [&] { return u(rng); });
}

/// Dense triple-loop T^pi v, independent of the Eigen reshaping used by the library.
inline Eigen::VectorXd dense_eval(const TabularMdp& mdp, const Policy& pi, const Eigen::VectorXd& v) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(mdp.num_states());
    for (int s = 0; s < mdp.num_states(); ++s)
        for (int a = 0; a < mdp.num_actions(); ++a) {
            double next = 0.0;
            for (int n = 0; n < mdp.num_states(); ++n) next += mdp.prob(s, a, n) * v(n);
            out(s) += pi(s, a) * (mdp.reward()(s, a) + mdp.discount() * next);
        }
    return out;
}

/// One-state MDP used by several hand-computed examples.
inline TabularMdp single_state(double reward, double gamma, int actions = 1) {
    Eigen::MatrixXd t = Eigen::MatrixXd::Ones(actions, 1);
    Eigen::MatrixXd r = Eigen::MatrixXd::Constant(1, actions, reward);
    return TabularMdp(t, r, gamma, Eigen::VectorXd::Ones(1));
}

/// Uniform s-rectangular radii at `fraction` of the bounded-radius limit on every state.
inline BallUncertainty radii_at_fraction_of_bound(const TabularMdp& mdp, double alpha_r, double fraction,
                                                  double epsilon, NormOrder p = NormOrder::L2) {
    BallUncertainty u = BallUncertainty::uniform(mdp.num_states(), alpha_r, 0.0, p);
    for (int s = 0; s < mdp.num_states(); ++s) u.alpha_p(s) = fraction * asm1_radius_bound(mdp, s, epsilon, p);
    return u;
}

} // namespace r2plan::testing

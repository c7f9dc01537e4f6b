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

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace r2plan {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using testing::radii_at_fraction_of_bound;
using testing::random_policy;
using testing::random_vector;

const NormOrder kOrders[] = {NormOrder::L1, NormOrder::L2, NormOrder::Linf};

/// Fixed point of a value map by plain iteration.
template <typename F>
VectorXd iterate_to_fixed_point(F&& apply, int S, double tol) {
    VectorXd v = VectorXd::Zero(S);
    for (int k = 0; k < 100000; ++k) {
        VectorXd next = apply(v);
        const double res = (next - v).cwiseAbs().maxCoeff();
        v = std::move(next);
        if (res < tol) break;
    }
    return v;
}

TEST(MinimizeLinearOverBall, MatchesDualNorm) {
    std::mt19937_64 rng(1);
    for (auto p : kOrders)
        for (int k = 0; k < 30; ++k) {
            const VectorXd g = random_vector(6, -1, 1, rng);
            const auto res = minimize_linear_over_ball(g, 0.3, p, InnerMinConfig{}, k);
            EXPECT_TRUE(res.converged);
            EXPECT_LE(lp_norm(res.minimizer, p), 0.3 + 1e-12);
            EXPECT_NEAR(res.value, -ball_support(0.3, g, p), 1e-9);
        }
    const auto zero = minimize_linear_over_ball(VectorXd::Ones(3), 0.0, NormOrder::L2, InnerMinConfig{}, 0);
    EXPECT_EQ(zero.value, 0.0);
}

TEST(RobustEval, ZeroRadiiIsVanilla) {
    std::mt19937_64 rng(2);
    const auto mdp = make_random_mdp(5, 3, 0.0, 4);
    const auto pi = random_policy(5, 3, rng);
    const VectorXd v = random_vector(5, -3, 3, rng);
    for (auto p : kOrders) {
        const auto out = robust_eval_apply_numeric(mdp, BallUncertainty::uniform(5, 0, 0, p), pi, v);
        EXPECT_EQ(out.value, bellman_eval_apply(mdp, pi, v));
        const auto sa = robust_eval_apply_numeric(mdp, SaBallUncertainty::uniform(5, 3, 0, 0, p), pi, v);
        EXPECT_EQ(sa.value, bellman_eval_apply(mdp, pi, v));
    }
}

TEST(RobustEval, RewardOnlyClosedForm) {
    const auto mdp = make_gridworld();
    const auto pi = Policy::uniform(26, 4);
    std::mt19937_64 rng(3);
    const VectorXd v = random_vector(26, 0, 10, rng);
    const auto out = robust_eval_apply_numeric(mdp, BallUncertainty::uniform(26, 1e-3, 0.0), pi, v);
    const VectorXd expect = (bellman_eval_apply(mdp, pi, v).array() - 5e-4).matrix();
    EXPECT_LE((out.value - expect).cwiseAbs().maxCoeff(), 1e-7);
    EXPECT_TRUE(out.converged());
}

TEST(RobustEval, NeverAboveNominal) {
    std::mt19937_64 rng(4);
    const auto mdp = make_random_mdp(4, 3, 0.02, 5);
    for (auto p : kOrders)
        for (int k = 0; k < 10; ++k) {
            const auto pi = random_policy(4, 3, rng);
            const VectorXd v = random_vector(4, -5, 5, rng);
            const auto out = robust_eval_apply_numeric(mdp, BallUncertainty::uniform(4, 0.1, 0.02, p), pi, v);
            EXPECT_TRUE((out.value.array() <= bellman_eval_apply(mdp, pi, v).array() + 1e-12).all());
        }
}

TEST(RobustEval, MatchesR2OperatorPerApplication) {
    std::mt19937_64 rng(5);
    for (auto p : kOrders)
        for (int k = 0; k < 5; ++k) {
            const auto mdp = make_random_mdp(4, 3, 0.03, 60 + k);
            const auto unc = BallUncertainty::uniform(4, 0.05, 0.02, p);
            R2Config cfg;
            cfg.uncertainty = unc;
            const auto pi = random_policy(4, 3, rng);
            const VectorXd v = random_vector(4, -5, 5, rng);
            const auto out = robust_eval_apply_numeric(mdp, unc, pi, v);
            EXPECT_LE((out.value - r2_eval_apply(mdp, cfg, pi, v)).cwiseAbs().maxCoeff(), 1e-8) << to_string(p);

            auto sa = SaBallUncertainty::uniform(4, 3, 0.0, 0.0, p);
            sa.alpha_r = MatrixXd::NullaryExpr(4, 3, [&] { return 0.05 * std::uniform_real_distribution<>(0, 1)(rng); });
            sa.alpha_p = MatrixXd::NullaryExpr(4, 3, [&] { return 0.02 * std::uniform_real_distribution<>(0, 1)(rng); });
            R2Config sa_cfg;
            sa_cfg.uncertainty = sa;
            const auto sa_out = robust_eval_apply_numeric(mdp, sa, pi, v);
            EXPECT_LE((sa_out.value - r2_eval_apply(mdp, sa_cfg, pi, v)).cwiseAbs().maxCoeff(), 1e-8);
        }
}

TEST(RobustEval, DeterministicForFixedSeed) {
    const auto mdp = make_random_mdp(4, 3, 0.03, 9);
    const auto unc = BallUncertainty::uniform(4, 0.05, 0.02, NormOrder::Linf);
    std::mt19937_64 rng(6);
    const auto pi = random_policy(4, 3, rng);
    const VectorXd v = random_vector(4, -5, 5, rng);
    InnerMinConfig cfg;
    cfg.seed = 42;
    EXPECT_EQ(robust_eval_apply_numeric(mdp, unc, pi, v, cfg).value, robust_eval_apply_numeric(mdp, unc, pi, v, cfg).value);
}

TEST(RobustEval, IterationCapIsReported) {
    const auto mdp = make_random_mdp(3, 2, 0.05, 10);
    InnerMinConfig cfg;
    cfg.max_iters = 2;
    const auto out = robust_eval_apply_numeric(mdp, BallUncertainty::uniform(3, 0.1, 0.01), Policy::uniform(3, 2),
                                               VectorXd::Ones(3), cfg);
    EXPECT_FALSE(out.converged());
    EXPECT_GT(out.unconverged_solves, 0);
    EXPECT_TRUE(out.value.allFinite());
    InnerMinConfig bad;
    bad.restarts = -1;
    EXPECT_THROW(bad.validate(), InvalidInput);
}

TEST(WorstCaseModel, ZeroValueIsDegenerate) {
    const auto mdp = make_random_mdp(3, 2, 0.05, 11);
    const auto unc = BallUncertainty::uniform(3, 0.2, 0.01);
    const auto pi = Policy::uniform(3, 2);
    const auto wc = worst_case_model(mdp, unc, pi, VectorXd::Zero(3));
    EXPECT_TRUE(wc.degenerate);
    EXPECT_EQ(wc.perturbed_transition, mdp.transition());
    const MatrixXd shift = wc.perturbed_reward - mdp.reward();
    for (int s = 0; s < 3; ++s) EXPECT_NEAR(shift(s, 0), -0.2 / std::sqrt(2.0), 1e-15);
    EXPECT_THROW(worst_case_model(mdp, BallUncertainty::uniform(3, 0.2, 0.01, NormOrder::L1), pi, VectorXd::Ones(3)),
                 UnsupportedConfig);
}

TEST(WorstCaseModel, AgreesWithNumericAndIsConsistent) {
    std::mt19937_64 rng(7);
    for (int k = 0; k < 10; ++k) {
        const auto mdp = make_random_mdp(5, 3, 0.02, 70 + k);
        const auto unc = BallUncertainty::uniform(5, 0.1, 0.015);
        const auto pi = random_policy(5, 3, rng);
        const VectorXd v = random_vector(5, -5, 5, rng);
        const auto wc = worst_case_model(mdp, unc, pi, v);
        EXPECT_FALSE(wc.degenerate);
        const auto numeric = robust_eval_apply_numeric(mdp, unc, pi, v);
        EXPECT_LE((wc.achieved_value - numeric.value).cwiseAbs().maxCoeff(), 1e-7);

        // closed form and plug-in consistency
        for (int s = 0; s < 5; ++s) {
            const VectorXd pi_s = pi.row(s).transpose();
            const double closed = bellman_eval_apply(mdp, pi, v)(s) - 0.1 * pi_s.norm() - 0.9 * 0.015 * v.norm() * pi_s.norm();
            EXPECT_NEAR(wc.achieved_value(s), closed, 1e-12);
            const MatrixXd dp = wc.perturbed_transition.middleRows(s * 3, 3) - mdp.kernel_slice(s);
            EXPECT_LE(dp.norm(), 0.015 + 1e-9);
            EXPECT_LE((wc.perturbed_reward - mdp.reward()).row(s).norm(), 0.1 + 1e-9);
        }
        // the perturbed rows need not stay stochastic, so evaluate the plug-in directly
        VectorXd plug(5);
        for (int s = 0; s < 5; ++s) {
            double acc = 0.0;
            for (int a = 0; a < 3; ++a) {
                double next = 0.0;
                for (int n = 0; n < 5; ++n) next += wc.perturbed_transition(s * 3 + a, n) * v(n);
                acc += pi(s, a) * (wc.perturbed_reward(s, a) + 0.9 * next);
            }
            plug(s) = acc;
        }
        EXPECT_LE((plug - wc.achieved_value).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Feasibility, RobustFixedPointIsFeasible) {
    const auto mdp = make_random_mdp(4, 3, 0.03, 12);
    const auto unc = BallUncertainty::uniform(4, 0.05, 0.02);
    const auto pi = Policy::uniform(4, 3);
    R2Config cfg;
    cfg.uncertainty = unc;
    const VectorXd v = policy_eval(R2Family{cfg}, mdp, pi, std::nullopt, 1e-13).final_value;
    const auto rep = robust_feasibility_check(mdp, unc, pi, v, 1000, 1);
    EXPECT_LE(rep.max_violation, 1e-7);
    EXPECT_EQ(rep.samples, 1000);

    const auto shifted = robust_feasibility_check(mdp, unc, pi, (v.array() + 1.0).matrix(), 1000, 1);
    EXPECT_GT(shifted.max_violation, 0.5 * (1.0 - mdp.discount()));

    const VectorXd exact = exact_policy_value(mdp, pi);
    EXPECT_LE(robust_feasibility_check(mdp, BallUncertainty::uniform(4, 0, 0), pi, exact, 100, 2).max_violation, 1e-9);
}

TEST(Feasibility, SaRectangular) {
    const auto mdp = make_random_mdp(4, 2, 0.03, 13);
    const auto unc = SaBallUncertainty::uniform(4, 2, 0.05, 0.02, NormOrder::Linf);
    const auto pi = Policy::uniform(4, 2);
    R2Config cfg;
    cfg.uncertainty = unc;
    const VectorXd v = policy_eval(R2Family{cfg}, mdp, pi, std::nullopt, 1e-13).final_value;
    EXPECT_LE(robust_feasibility_check(mdp, unc, pi, v, 1000, 3).max_violation, 1e-7);
}

TEST(RobustEquivalence, FixedPointsMatchR2OnRandomMdps) {
    std::mt19937_64 rng(8);
    for (int k = 0; k < 6; ++k) {
        const int S = 2 + k % 5;
        const int A = 2 + k % 3;
        const auto mdp = make_random_mdp(S, A, 0.5 / S, 800 + k);
        const double eps = default_asm1_epsilon(mdp.discount());
        const auto unc = radii_at_fraction_of_bound(mdp, 0.05, 0.9, eps);
        R2Config cfg;
        cfg.uncertainty = unc;
        const auto pi = random_policy(S, A, rng);
        const VectorXd robust = iterate_to_fixed_point(
            [&](const VectorXd& v) { return robust_eval_apply_numeric(mdp, unc, pi, v).value; }, S, 1e-10);
        const VectorXd r2 = iterate_to_fixed_point([&](const VectorXd& v) { return r2_eval_apply(mdp, cfg, pi, v); }, S, 1e-12);
        EXPECT_LE((robust - r2).cwiseAbs().maxCoeff(), 1e-5);
    }
}

TEST(RobustEquivalence, RewardOnlyMatchesNormRegularizedEvaluation) {
    std::mt19937_64 rng(9);
    for (int k = 0; k < 5; ++k) {
        const auto mdp = make_random_mdp(3 + k % 4, 2 + k % 3, 0.0, 900 + k);
        const int S = mdp.num_states();
        const auto unc = BallUncertainty::uniform(S, 0.1, 0.0);
        const auto pi = random_policy(S, mdp.num_actions(), rng);
        const VectorXd robust = iterate_to_fixed_point(
            [&](const VectorXd& v) { return robust_eval_apply_numeric(mdp, unc, pi, v).value; }, S, 1e-11);
        VectorXd rhs = policy_reward(mdp, pi);
        for (int s = 0; s < S; ++s) rhs(s) -= 0.1 * pi.row(s).norm();
        EXPECT_LE((robust - solve_policy_system(mdp, pi, rhs)).cwiseAbs().maxCoeff(), 1e-6);
    }
}

TEST(RobustEquivalence, ShannonIntervalSetMatchesEntropyRegularizedEvaluation) {
    // adversarial reward shift r in the box [ln(1/pi), B], B = 1e3, minimizing <r, pi> by
    // projected descent from the top corner; truncation at B never binds at the optimum
    std::mt19937_64 rng(10);
    const auto mdp = make_random_mdp(4, 3, 0.0, 11);
    const auto pi = random_policy(4, 3, rng);
    const auto set = make_interval_set(RegularizerKind::neg_shannon(), pi);
    const double B = 1e3;
    auto robust_apply = [&](const VectorXd& v) {
        VectorXd out(4);
        for (int s = 0; s < 4; ++s) {
            VectorXd r = VectorXd::Constant(3, B);
            for (int it = 0; it < 1000; ++it)
                r = (r - 1e4 * pi.row(s).transpose()).cwiseMax(set.lower.row(s).transpose()).cwiseMin(B);
            double acc = 0.0;
            for (int a = 0; a < 3; ++a) acc += pi(s, a) * (mdp.reward()(s, a) + r(a) + 0.9 * mdp.kernel_row(s, a).dot(v));
            out(s) = acc;
        }
        return out;
    };
    const VectorXd robust = iterate_to_fixed_point(robust_apply, 4, 1e-12);
    VectorXd rhs = policy_reward(mdp, pi);
    for (int s = 0; s < 4; ++s) rhs(s) -= omega(RegularizerKind::neg_shannon(), pi.row(s).transpose());
    EXPECT_LE((robust - solve_policy_system(mdp, pi, rhs)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(RobustMonotoneInRadius, LargerBallsNeverRaiseTheValue) {
    std::mt19937_64 rng(11);
    const auto mdp = make_random_mdp(4, 3, 0.03, 14);
    const auto pi = random_policy(4, 3, rng);
    const VectorXd v = random_vector(4, 0, 5, rng);
    VectorXd prev = bellman_eval_apply(mdp, pi, v);
    for (double r : {0.001, 0.01, 0.02, 0.03}) {
        const VectorXd cur = robust_eval_apply_numeric(mdp, BallUncertainty::uniform(4, r, r), pi, v).value;
        EXPECT_TRUE((cur.array() <= prev.array() + 1e-9).all());
        prev = cur;
    }
}

TEST(RobustGreedy, SaRectIsDeterministicAndMatchesR2) {
    const auto mdp = make_gridworld();
    const auto unc = SaBallUncertainty::uniform(26, 4, 1e-3, 1e-5);
    R2Config cfg;
    cfg.uncertainty = unc;
    std::mt19937_64 rng(12);
    const VectorXd v = random_vector(26, 0, 10, rng);
    const auto g = robust_greedy_numeric(mdp, unc, v);
    EXPECT_TRUE(g.policy.is_deterministic());
    const auto r2 = r2_opt_apply(mdp, cfg, v);
    EXPECT_LE((g.evaluation.value - r2.value).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(RobustGreedy, SRectApproachesR2Optimum) {
    const auto mdp = make_random_mdp(4, 3, 0.05, 15);
    const auto unc = BallUncertainty::uniform(4, 0.3, 0.02);
    R2Config cfg;
    cfg.uncertainty = unc;
    std::mt19937_64 rng(13);
    const VectorXd v = random_vector(4, 0, 5, rng);
    const auto g = robust_greedy_numeric(mdp, unc, v);
    const auto r2 = r2_opt_apply(mdp, cfg, v);
    EXPECT_TRUE((g.evaluation.value.array() <= r2.value.array() + 1e-9).all());
    EXPECT_LE((g.evaluation.value - r2.value).cwiseAbs().maxCoeff(), 1e-2);
}

} // namespace
} // namespace r2plan

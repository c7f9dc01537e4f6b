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
using testing::single_state;

R2Family r2_family(const Uncertainty& u) {
    R2Config cfg;
    cfg.uncertainty = u;
    return R2Family{cfg};
}

const BallUncertainty kTable3 = BallUncertainty::uniform(26, 1e-3, 1e-5);

TEST(PolicyEval, VanillaSingleState) {
    const auto rep = policy_eval(VanillaFamily{}, single_state(1.0, 0.9), Policy::uniform(1, 1));
    EXPECT_TRUE(rep.converged);
    EXPECT_NEAR(rep.final_value(0), 10.0, 1e-3 / (1 - 0.9));
    EXPECT_EQ(rep.residual_trace.size(), static_cast<std::size_t>(rep.iterations));
    EXPECT_LT(rep.residual_trace.back(), 1e-3);
    EXPECT_GE(rep.residual_trace[rep.residual_trace.size() - 2], 1e-3);
}

TEST(PolicyEval, VanillaGridworldMatchesLinearSolve) {
    const auto mdp = make_gridworld();
    const auto pi = Policy::uniform(26, 4);
    const auto rep = policy_eval(VanillaFamily{}, mdp, pi);
    EXPECT_LE((rep.final_value - exact_policy_value(mdp, pi)).cwiseAbs().maxCoeff(), 1e-3 / (1 - 0.9));
}

TEST(PolicyEval, IterationCapLeavesUnconvergedReport) {
    const auto rep = policy_eval(VanillaFamily{}, single_state(1.0, 0.9), Policy::uniform(1, 1), std::nullopt, 1e-12, 5);
    EXPECT_FALSE(rep.converged);
    EXPECT_EQ(rep.iterations, 5);
    EXPECT_EQ(rep.residual_trace.size(), 5u);
    EXPECT_THROW(policy_eval(VanillaFamily{}, single_state(1.0, 0.9), Policy::uniform(1, 1), std::nullopt, 0.0),
                 InvalidInput);
    EXPECT_THROW(mpi(VanillaFamily{}, single_state(1.0, 0.9), 0), InvalidInput);
}

TEST(PolicyEval, R2AndRobustAgreeOnGridworld) {
    const auto mdp = make_gridworld();
    const auto pi = Policy::uniform(26, 4);
    const auto r2 = policy_eval(r2_family(kTable3), mdp, pi);
    const auto robust = policy_eval(RobustNumericFamily{kTable3, {}}, mdp, pi);
    EXPECT_TRUE(r2.converged);
    EXPECT_TRUE(robust.converged);
    EXPECT_EQ(robust.inner_unconverged, 0);
    EXPECT_LE((r2.final_value - robust.final_value).cwiseAbs().maxCoeff(), 1e-5);
    EXPECT_EQ(r2.iterations, robust.iterations);
}

TEST(PolicyEval, GeometricResidualDecay) {
    std::mt19937_64 rng(1);
    const auto mdp = make_random_mdp(5, 3, 0.05, 2);
    const double eps = default_asm1_epsilon(mdp.discount());
    const auto pi = random_policy(5, 3, rng);
    const auto van = policy_eval(VanillaFamily{}, mdp, pi, std::nullopt, 1e-12);
    for (std::size_t k = 1; k < van.residual_trace.size(); ++k)
        EXPECT_LE(van.residual_trace[k], mdp.discount() * van.residual_trace[k - 1] + 1e-9);
    const auto r2 = policy_eval(r2_family(radii_at_fraction_of_bound(mdp, 0.1, 0.9, eps)), mdp, pi, std::nullopt, 1e-12);
    for (std::size_t k = 1; k < r2.residual_trace.size(); ++k)
        EXPECT_LE(r2.residual_trace[k], (1 - eps) * r2.residual_trace[k - 1] + 1e-9);
}

TEST(Mpi, ZeroRadiiMatchesVanilla) {
    const auto mdp = make_gridworld();
    const auto van = mpi(VanillaFamily{}, mdp, 1);
    const auto r2 = mpi(r2_family(BallUncertainty::uniform(26, 0, 0)), mdp, 1);
    EXPECT_LE((van.final_value - r2.final_value).cwiseAbs().maxCoeff(), 2e-3);
    EXPECT_EQ(van.final_policy->probs(), r2.final_policy->probs());
}

TEST(Mpi, MOneVersusMFour) {
    const auto mdp = make_gridworld();
    for (const OperatorFamily& fam : {OperatorFamily{VanillaFamily{}}, OperatorFamily{r2_family(kTable3)},
                                      OperatorFamily{r2_family(SaBallUncertainty::uniform(26, 4, 1e-3, 1e-5))}}) {
        const auto m1 = mpi(fam, mdp, 1);
        const auto m4 = mpi(fam, mdp, 4);
        EXPECT_TRUE(m1.converged && m4.converged);
        // stopping at residual < theta leaves each run within gamma theta/(1-gamma) of the fixed point
        const double bound = 2 * 0.9 * 1e-3 / (1 - 0.9);
        EXPECT_LE((m1.final_value - m4.final_value).cwiseAbs().maxCoeff(), bound);
        EXPECT_LE(m4.iterations, m1.iterations);
    }
}

TEST(Mpi, SaRectangularPolicyIsDeterministic) {
    const auto mdp = make_gridworld();
    const auto rep = mpi(r2_family(SaBallUncertainty::uniform(26, 4, 1e-3, 1e-5)), mdp, 4);
    ASSERT_TRUE(rep.final_policy.has_value());
    EXPECT_TRUE(rep.final_policy->is_deterministic());
    const auto rnd = make_random_mdp(5, 3, 0.02, 3);
    auto sa = SaBallUncertainty::uniform(5, 3, 0.05, 0.01);
    sa.alpha_r(2, 1) = 0.3;
    EXPECT_TRUE(mpi(r2_family(sa), rnd, 2, 1e-8).final_policy->is_deterministic());
}

TEST(Mpi, OptimalR2ValueDominatesRandomPolicies) {
    std::mt19937_64 rng(4);
    const auto mdp = make_random_mdp(5, 3, 0.04, 5);
    const double eps = default_asm1_epsilon(mdp.discount());
    const auto fam = r2_family(radii_at_fraction_of_bound(mdp, 0.2, 0.9, eps));
    const double theta = 1e-6;
    const auto star = mpi(fam, mdp, 1, theta);
    ASSERT_TRUE(star.converged);
    for (int k = 0; k < 50; ++k) {
        const auto pi = random_policy(5, 3, rng);
        const auto ev = policy_eval(fam, mdp, pi, std::nullopt, theta);
        EXPECT_TRUE((ev.final_value.array() <= star.final_value.array() + 2 * theta).all());
    }
}

TEST(Mpi, RobustNeverAboveVanilla) {
    const auto mdp = make_random_mdp(4, 3, 0.03, 6);
    const auto van = mpi(VanillaFamily{}, mdp, 2, 1e-8);
    for (double r : {0.0, 0.01, 0.05}) {
        const auto rob = mpi(RobustNumericFamily{SaBallUncertainty::uniform(4, 3, r, r / 5), {}}, mdp, 2, 1e-8);
        EXPECT_TRUE((rob.final_value.array() <= van.final_value.array() + 1e-7).all()) << r;
        const auto r2 = mpi(r2_family(BallUncertainty::uniform(4, r, r / 5)), mdp, 2, 1e-8);
        EXPECT_TRUE((r2.final_value.array() <= van.final_value.array() + 1e-7).all()) << r;
    }
}

TEST(Mpi, RobustSaMatchesR2Sa) {
    const auto mdp = make_random_mdp(4, 3, 0.05, 7);
    const auto u = SaBallUncertainty::uniform(4, 3, 0.05, 0.02);
    const auto rob = mpi(RobustNumericFamily{u, {}}, mdp, 2, 1e-9);
    const auto r2 = mpi(r2_family(u), mdp, 2, 1e-9);
    EXPECT_LE((rob.final_value - r2.final_value).cwiseAbs().maxCoeff(), 1e-7);
    EXPECT_EQ(rob.final_policy->probs(), r2.final_policy->probs());
}

TEST(ContractionProbe, Bounds) {
    const auto mdp = make_random_mdp(5, 3, 0.04, 8);
    EXPECT_LE(contraction_probe(VanillaFamily{}, mdp, 200, 1), mdp.discount() + 1e-10);
    EXPECT_LE(contraction_probe(r2_family(BallUncertainty::uniform(5, 0.1, 0)), mdp, 200, 2), mdp.discount() + 1e-10);
    const double eps = default_asm1_epsilon(mdp.discount());
    const auto fam = r2_family(radii_at_fraction_of_bound(mdp, 0.1, 0.9, eps));
    EXPECT_LE(contraction_probe(fam, mdp, 200, 3), 1 - eps + 1e-8);
    const auto pi = Policy::uniform(5, 3);
    EXPECT_LE(contraction_probe(fam, mdp, 200, 4, &pi), 1 - eps + 1e-8);
}

} // namespace
} // namespace r2plan

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

// Evaluates the uniform policy on the 5x5 grid world with the vanilla, R2 and
// numerically robust operators, then plans with the R2 operator.

#include "r2plan/r2plan.hpp"

#include <cstdio>

int main() {
    using namespace r2plan;
    const TabularMdp mdp = make_gridworld();
    const Uncertainty unc = BallUncertainty::uniform(mdp.num_states(), 1e-3, 1e-5);
    R2Config cfg;
    cfg.uncertainty = unc;
    const Policy uniform = Policy::uniform(mdp.num_states(), mdp.num_actions());

    const auto vanilla = policy_eval(VanillaFamily{}, mdp, uniform);
    const auto r2 = policy_eval(R2Family{cfg}, mdp, uniform);
    const auto robust = policy_eval(RobustNumericFamily{unc, {}}, mdp, uniform);
    std::printf("policy evaluation (uniform policy)\n");
    std::printf("  vanilla  J=%.6f  iters=%d  %.2es\n", vanilla.final_value.dot(mdp.initial_dist()), vanilla.iterations,
                vanilla.wall_time_seconds);
    std::printf("  r2       J=%.6f  iters=%d  %.2es\n", r2.final_value.dot(mdp.initial_dist()), r2.iterations,
                r2.wall_time_seconds);
    std::printf("  robust   J=%.6f  iters=%d  %.2es\n", robust.final_value.dot(mdp.initial_dist()), robust.iterations,
                robust.wall_time_seconds);
    std::printf("  sup |v_r2 - v_robust| = %.3e\n", (r2.final_value - robust.final_value).cwiseAbs().maxCoeff());

    const auto plan = mpi(R2Family{cfg}, mdp, 4);
    std::printf("r2 modified policy iteration (m=4): J=%.6f after %d iterations\n",
                plan.final_value.dot(mdp.initial_dist()), plan.iterations);
    std::printf("greedy action per cell (0 up, 1 down, 2 left, 3 right):\n");
    for (int row = 0; row < 5; ++row) {
        std::printf(" ");
        for (int col = 0; col < 5; ++col) {
            const auto pi_s = plan.final_policy->row(grid_state(5, row, col));
            Eigen::Index a = 0;
            pi_s.maxCoeff(&a);
            std::printf(" %d", static_cast<int>(a));
        }
        std::printf("\n");
    }
    return 0;
}

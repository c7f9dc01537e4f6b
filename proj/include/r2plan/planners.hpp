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
#include "r2plan/r2_operators.hpp"
#include "r2plan/robust_oracle.hpp"
#include "r2plan/uncertainty.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <random>
#include <type_traits>
#include <variant>
#include <vector>

namespace r2plan {

struct VanillaFamily {};

struct R2Family {
    R2Config config;
};

struct RobustNumericFamily {
    Uncertainty uncertainty;
    InnerMinConfig inner;
};

/// Which evaluation operator and greedy step a planner uses.
using OperatorFamily = std::variant<VanillaFamily, R2Family, RobustNumericFamily>;

inline constexpr double kDefaultTheta = 1e-3;
inline constexpr int kDefaultMaxIters = 100000;

struct ConvergenceReport {
    int iterations = 0;
    std::vector<double> residual_trace;
    double wall_time_seconds = 0.0;
    bool converged = false;
    ValueFn final_value;
    std::optional<Policy> final_policy;
    int inner_unconverged = 0; ///< robust family only: inner solves that hit their cap
};

namespace detail {

struct Applied {
    ValueFn value;
    int unconverged = 0;
};

inline Applied apply_eval(const OperatorFamily& family, const TabularMdp& mdp, const Policy& pi, const ValueFn& v) {
    return std::visit(
        [&](const auto& f) -> Applied {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, VanillaFamily>) {
                return {bellman_eval_apply(mdp, pi, v), 0};
            } else if constexpr (std::is_same_v<F, R2Family>) {
                return {r2_eval_apply(mdp, f.config, pi, v), 0};
            } else {
                auto r = robust_eval_apply_numeric(mdp, f.uncertainty, pi, v, f.inner);
                return {std::move(r.value), r.unconverged_solves};
            }
        },
        family);
}

inline Policy apply_greedy(const OperatorFamily& family, const TabularMdp& mdp, const ValueFn& v, int& unconverged) {
    return std::visit(
        [&](const auto& f) -> Policy {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, VanillaFamily>) {
                return bellman_opt_apply(mdp, v).policy;
            } else if constexpr (std::is_same_v<F, R2Family>) {
                return r2_greedy(mdp, f.config, v);
            } else {
                auto g = robust_greedy_numeric(mdp, f.uncertainty, v, f.inner);
                unconverged += g.evaluation.unconverged_solves;
                return std::move(g.policy);
            }
        },
        family);
}

inline void validate_family(const OperatorFamily& family, const TabularMdp& mdp) {
    if (const auto* r2 = std::get_if<R2Family>(&family)) r2->config.validate(mdp);
    if (const auto* rb = std::get_if<RobustNumericFamily>(&family)) {
        validate_uncertainty(rb->uncertainty, mdp);
        rb->inner.validate();
    }
}

} // namespace detail

/// Evaluation operator of the family applied once.
inline ValueFn family_eval_apply(const OperatorFamily& family, const TabularMdp& mdp, const Policy& pi,
                                 const ValueFn& v) {
    return detail::apply_eval(family, mdp, pi, v).value;
}

/// Optimality operator of the family: greedy step, then one evaluation with the greedy policy.
inline ValuePolicy family_opt_apply(const OperatorFamily& family, const TabularMdp& mdp, const ValueFn& v) {
    int ignored = 0;
    Policy pi = detail::apply_greedy(family, mdp, v, ignored);
    ValueFn value = family_eval_apply(family, mdp, pi, v);
    return {std::move(value), std::move(pi)};
}

/// Iterates v <- T^pi v until ||v_{k+1} - v_k||_inf < theta or max_iters.
inline ConvergenceReport policy_eval(const OperatorFamily& family, const TabularMdp& mdp, const Policy& pi,
                                     std::optional<ValueFn> v0 = std::nullopt, double theta = kDefaultTheta,
                                     int max_iters = kDefaultMaxIters) {
    detail::require(theta > 0.0, "policy_eval: theta must be positive");
    detail::require(max_iters > 0, "policy_eval: max_iters must be positive");
    detail::validate_family(family, mdp);
    detail::check_policy(mdp, pi);
    ValueFn v = v0 ? std::move(*v0) : ValueFn(ValueFn::Zero(mdp.num_states()));
    detail::check_value(mdp, v);

    ConvergenceReport rep;
    const auto start = std::chrono::steady_clock::now();
    while (rep.iterations < max_iters) {
        auto next = detail::apply_eval(family, mdp, pi, v);
        rep.inner_unconverged += next.unconverged;
        if (!next.value.allFinite()) throw NumericError("policy_eval: iterate became non-finite");
        const double residual = (next.value - v).cwiseAbs().maxCoeff();
        v = std::move(next.value);
        rep.residual_trace.push_back(residual);
        ++rep.iterations;
        if (residual < theta) {
            rep.converged = true;
            break;
        }
    }
    rep.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rep.final_value = std::move(v);
    return rep;
}

/**
 * Modified policy iteration: pi_{k+1} = G(v_k), v_{k+1} = (T^{pi_{k+1}})^m v_k,
 * stopping once ||v_{k+1} - v_k||_inf < theta.
 */
inline ConvergenceReport mpi(const OperatorFamily& family, const TabularMdp& mdp, int m, double theta = kDefaultTheta,
                             std::optional<ValueFn> v0 = std::nullopt, int max_iters = kDefaultMaxIters) {
    detail::require(m >= 1, "mpi: m must be at least 1");
    detail::require(theta > 0.0, "mpi: theta must be positive");
    detail::require(max_iters > 0, "mpi: max_iters must be positive");
    detail::validate_family(family, mdp);
    ValueFn v = v0 ? std::move(*v0) : ValueFn(ValueFn::Zero(mdp.num_states()));
    detail::check_value(mdp, v);

    ConvergenceReport rep;
    const auto start = std::chrono::steady_clock::now();
    while (rep.iterations < max_iters) {
        Policy pi = detail::apply_greedy(family, mdp, v, rep.inner_unconverged);
        ValueFn next = v;
        for (int j = 0; j < m; ++j) {
            auto applied = detail::apply_eval(family, mdp, pi, next);
            rep.inner_unconverged += applied.unconverged;
            next = std::move(applied.value);
        }
        if (!next.allFinite()) throw NumericError("mpi: iterate became non-finite");
        const double residual = (next - v).cwiseAbs().maxCoeff();
        v = std::move(next);
        rep.final_policy = std::move(pi);
        rep.residual_trace.push_back(residual);
        ++rep.iterations;
        if (residual < theta) {
            rep.converged = true;
            break;
        }
    }
    rep.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rep.final_value = std::move(v);
    return rep;
}

/**
 * Largest observed ||T v1 - T v2||_inf / ||v1 - v2||_inf over random pairs.
 *
 * T is the evaluation operator of `policy` when one is given, the optimality
 * operator otherwise. Values are drawn uniformly in [-R, R] with R = max|r0|/(1-gamma).
 */
inline double contraction_probe(const OperatorFamily& family, const TabularMdp& mdp, int pairs, std::uint64_t rng_seed,
                                const Policy* policy = nullptr) {
    detail::require(pairs > 0, "contraction_probe: pairs must be positive");
    detail::validate_family(family, mdp);
    const double bound = std::max(1.0, mdp.reward().cwiseAbs().maxCoeff()) / (1.0 - mdp.discount());
    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> unif(-bound, bound);
    const auto S = mdp.num_states();
    auto apply = [&](const ValueFn& v) {
        return policy ? family_eval_apply(family, mdp, *policy, v) : family_opt_apply(family, mdp, v).value;
    };
    double worst = 0.0;
    for (int n = 0; n < pairs; ++n) {
        const ValueFn v1 = ValueFn::NullaryExpr(S, [&] { return unif(rng); });
        const ValueFn v2 = ValueFn::NullaryExpr(S, [&] { return unif(rng); });
        const double denom = (v1 - v2).cwiseAbs().maxCoeff();
        if (denom == 0.0) continue;
        worst = std::max(worst, (apply(v1) - apply(v2)).cwiseAbs().maxCoeff() / denom);
    }
    return worst;
}

} // namespace r2plan

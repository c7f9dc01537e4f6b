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

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <variant>
#include <vector>

namespace r2plan {

/// Settings of the numerical inner minimization over uncertainty balls.
struct InnerMinConfig {
    int max_iters = 5000;
    double tolerance = 1e-9; ///< stop when an iterate moves less than tolerance * radius (sup norm)
    int restarts = 5;        ///< random starts in addition to the nominal start
    double step_size = 0.05; ///< first step length in units of the radius
    double step_growth = 2.0; ///< step length multiplier per iteration; 1 keeps it fixed
    std::uint64_t seed = 0;
    int greedy_iters = 200;  ///< supergradient steps of the s-rectangular robust greedy step

    void validate() const {
        detail::require(max_iters > 0 && tolerance > 0.0 && restarts >= 0 && step_size > 0.0 &&
                            greedy_iters > 0,
                        "InnerMinConfig: iteration counts, tolerance and step size must be positive");
        detail::require(step_growth >= 1.0, "InnerMinConfig: step_growth must be at least 1");
    }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Stream seed for one (state, slot, restart) triple, independent of evaluation order.
inline std::uint64_t stream_seed(std::uint64_t seed, int state, int slot, int restart) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(state));
    h = splitmix64(h ^ (static_cast<std::uint64_t>(slot) << 20));
    return splitmix64(h ^ (static_cast<std::uint64_t>(restart) << 40));
}

} // namespace detail

/// Uniform sample from {x in R^dim : ||x||_p <= radius}.
template <typename Rng>
Eigen::VectorXd sample_in_ball(Eigen::Index dim, double radius, NormOrder p, Rng& rng) {
    if (radius <= 0.0 || dim == 0) return Eigen::VectorXd::Zero(dim);
    switch (p) {
    case NormOrder::L2: {
        std::normal_distribution<double> normal;
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(dim, [&] { return normal(rng); });
        const double n = x.norm();
        if (n == 0.0) return Eigen::VectorXd::Zero(dim);
        return x * (radius * std::pow(unif(rng), 1.0 / static_cast<double>(dim)) / n);
    }
    case NormOrder::Linf: {
        std::uniform_real_distribution<double> unif(-radius, radius);
        return Eigen::VectorXd::NullaryExpr(dim, [&] { return unif(rng); });
    }
    case NormOrder::L1: {
        // dim + 1 exponentials normalized give a uniform point of the simplex interior
        std::exponential_distribution<double> expo(1.0);
        std::bernoulli_distribution coin(0.5);
        Eigen::VectorXd e = Eigen::VectorXd::NullaryExpr(dim, [&] { return expo(rng); });
        const double total = e.sum() + expo(rng);
        for (Eigen::Index i = 0; i < dim; ++i) e(i) *= (coin(rng) ? 1.0 : -1.0) * radius / total;
        return e;
    }
    }
    return {};
}

/// Minimizer of <g, x> over a ball found by projected gradient descent.
struct BallMinResult {
    Eigen::VectorXd minimizer;
    double value = 0.0;
    bool converged = true;
};

/**
 * min <g, x> s.t. ||x||_p <= radius by projected gradient descent.
 *
 * Runs from the centre and from `restarts` uniform random starts; each run
 * steps along -g/||g||_2 and projects back onto the ball. The first step has
 * length step_size * radius and later ones grow by step_growth, so coordinates
 * with a small gradient still reach the optimal face. The best end point wins.
 */
inline BallMinResult minimize_linear_over_ball(const Eigen::VectorXd& g, double radius, NormOrder p,
                                               const InnerMinConfig& cfg, std::uint64_t stream) {
    BallMinResult best{Eigen::VectorXd::Zero(g.size()), 0.0, true};
    const double gnorm = g.norm();
    if (radius <= 0.0 || gnorm == 0.0) return best;
    const Eigen::VectorXd dir = -g / gnorm;
    const double max_len = 1e12 * radius;
    bool all_converged = true;
    for (int start = 0; start <= cfg.restarts; ++start) {
        std::mt19937_64 rng(detail::splitmix64(stream + static_cast<std::uint64_t>(start)));
        Eigen::VectorXd x = start == 0 ? Eigen::VectorXd::Zero(g.size()) : sample_in_ball(g.size(), radius, p, rng);
        bool converged = false;
        double len = cfg.step_size * radius;
        for (int it = 0; it < cfg.max_iters; ++it) {
            Eigen::VectorXd next = project_ball(x + len * dir, radius, p);
            len = std::min(len * cfg.step_growth, max_len);
            const double move = (next - x).cwiseAbs().maxCoeff();
            x = std::move(next);
            if (move <= cfg.tolerance * radius) {
                converged = true;
                break;
            }
        }
        all_converged = all_converged && converged;
        const double val = g.dot(x);
        if (val < best.value) {
            best.value = val;
            best.minimizer = std::move(x);
        }
    }
    best.converged = all_converged;
    return best;
}

/// Robust evaluation values plus the count of inner solves that hit the iteration cap.
struct RobustEvaluation {
    ValueFn value;
    int unconverged_solves = 0;
    bool converged() const noexcept { return unconverged_solves == 0; }
};

/// The adversarial perturbations (P, r) found for one state, stored in full-model layout.
struct StateWorstCase {
    double value = 0.0;               ///< T^pi_{(P0+P, r0+r)} v(s)
    Eigen::VectorXd reward_shift;     ///< r(s, .)
    Eigen::MatrixXd transition_shift; ///< P(. | s, .) as A x S
    int unconverged = 0;
};

namespace detail {

inline StateWorstCase robust_state_min(const TabularMdp& mdp, const Uncertainty& unc, const Eigen::VectorXd& pi_s,
                                       const ValueFn& v, int s, const InnerMinConfig& cfg) {
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const double gamma = mdp.discount();
    StateWorstCase out;
    out.reward_shift = Eigen::VectorXd::Zero(A);
    out.transition_shift = Eigen::MatrixXd::Zero(A, S);

    if (const auto* b = std::get_if<BallUncertainty>(&unc)) {
        const auto rw = minimize_linear_over_ball(pi_s, b->alpha_r(s), b->norm_order, cfg,
                                                  stream_seed(cfg.seed, s, 0, 0));
        // gradient of gamma sum_{a,s'} pi(a) P(a,s') v(s'), flattened column-major over A x S
        const Eigen::MatrixXd grad = gamma * pi_s * v.transpose();
        const Eigen::VectorXd flat = Eigen::Map<const Eigen::VectorXd>(grad.data(), grad.size());
        const auto tr = minimize_linear_over_ball(flat, b->alpha_p(s), b->norm_order, cfg,
                                                  stream_seed(cfg.seed, s, 1, 0));
        out.reward_shift = rw.minimizer;
        out.transition_shift = Eigen::Map<const Eigen::MatrixXd>(tr.minimizer.data(), A, S);
        out.unconverged = (rw.converged ? 0 : 1) + (tr.converged ? 0 : 1);
    } else {
        const auto& sa = std::get<SaBallUncertainty>(unc);
        for (int a = 0; a < A; ++a) {
            const Eigen::VectorXd gr = Eigen::VectorXd::Constant(1, pi_s(a));
            const auto rw = minimize_linear_over_ball(gr, sa.alpha_r(s, a), sa.norm_order, cfg,
                                                      stream_seed(cfg.seed, s, 2 * a + 2, 0));
            const Eigen::VectorXd gp = gamma * pi_s(a) * v;
            const auto tr = minimize_linear_over_ball(gp, sa.alpha_p(s, a), sa.norm_order, cfg,
                                                      stream_seed(cfg.seed, s, 2 * a + 3, 0));
            out.reward_shift(a) = rw.minimizer(0);
            out.transition_shift.row(a) = tr.minimizer.transpose();
            out.unconverged += (rw.converged ? 0 : 1) + (tr.converged ? 0 : 1);
        }
    }
    const Eigen::VectorXd r_row = mdp.reward().row(s).transpose() + out.reward_shift;
    const Eigen::MatrixXd p_rows = mdp.kernel_slice(s) + out.transition_shift;
    out.value = pi_s.dot(r_row + gamma * (p_rows * v));
    return out;
}

} // namespace detail

/**
 * [T^{pi,U} v](s) = min over the configured balls of T^pi_{(P0+P, r0+r)} v(s),
 * solved numerically per state. The closed-form support functions are not used.
 */
inline RobustEvaluation robust_eval_apply_numeric(const TabularMdp& mdp, const Uncertainty& unc, const Policy& pi,
                                                  const ValueFn& v, const InnerMinConfig& cfg = {}) {
    validate_uncertainty(unc, mdp);
    detail::check_policy(mdp, pi);
    detail::check_value(mdp, v);
    cfg.validate();
    RobustEvaluation out{ValueFn(mdp.num_states()), 0};
    for (int s = 0; s < mdp.num_states(); ++s) {
        const auto wc = detail::robust_state_min(mdp, unc, pi.row(s).transpose(), v, s, cfg);
        out.value(s) = wc.value;
        out.unconverged_solves += wc.unconverged;
    }
    return out;
}

/// Analytic worst case for l2 balls.
struct WorstCaseModel {
    Eigen::MatrixXd perturbed_transition; ///< (P0 + P), (S*A) x S
    Eigen::MatrixXd perturbed_reward;     ///< (r0 + r), S x A
    Eigen::VectorXd achieved_value;
    bool degenerate = false; ///< some state had v . pi_s = 0 with alpha_p > 0
};

/**
 * Cauchy-Schwarz minimizer of the inner problem: r_s = -alpha_r pi_s/||pi_s||,
 * P_s = -alpha_p (v . pi_s)/||v . pi_s||. When v . pi_s vanishes every direction
 * is optimal; the transition perturbation is left at zero and `degenerate` is set.
 */
inline WorstCaseModel worst_case_model(const TabularMdp& mdp, const BallUncertainty& unc, const Policy& pi,
                                       const ValueFn& v) {
    unc.validate(mdp.num_states());
    detail::check_policy(mdp, pi);
    detail::check_value(mdp, v);
    if (unc.norm_order != NormOrder::L2)
        throw UnsupportedConfig("worst_case_model: analytic minimizer implemented for l2 balls only");
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const double gamma = mdp.discount();
    WorstCaseModel out{mdp.transition(), mdp.reward(), ValueFn(S), false};
    for (int s = 0; s < S; ++s) {
        const Eigen::VectorXd pi_s = pi.row(s).transpose();
        out.perturbed_reward.row(s) -= (unc.alpha_r(s) / pi_s.norm()) * pi_s.transpose();
        const Eigen::MatrixXd outer = pi_s * v.transpose(); // A x S, matches kernel_slice layout
        const double n = outer.norm();
        if (n > 0.0) {
            out.perturbed_transition.middleRows(static_cast<Eigen::Index>(s) * A, A) -= (unc.alpha_p(s) / n) * outer;
        } else if (unc.alpha_p(s) > 0.0) {
            out.degenerate = true;
        }
        const Eigen::VectorXd r_row = out.perturbed_reward.row(s).transpose();
        const Eigen::MatrixXd p_rows = out.perturbed_transition.middleRows(static_cast<Eigen::Index>(s) * A, A);
        out.achieved_value(s) = pi_s.dot(r_row + gamma * (p_rows * v));
    }
    return out;
}

/// Worst observed violation of v(s) <= T^pi_{(P,r)} v(s) over sampled models.
struct FeasibilityReport {
    double max_violation = -std::numeric_limits<double>::infinity();
    int worst_state = -1;
    int samples = 0;
};

/**
 * Draws models uniformly from the uncertainty balls (per state, or per state-action)
 * and records max_s (v(s) - T^pi_{(P,r)} v(s)). A robust-feasible v gives a value <= 0.
 */
inline FeasibilityReport robust_feasibility_check(const TabularMdp& mdp, const Uncertainty& unc, const Policy& pi,
                                                  const ValueFn& v, int num_samples, std::uint64_t rng_seed) {
    validate_uncertainty(unc, mdp);
    detail::check_policy(mdp, pi);
    detail::check_value(mdp, v);
    detail::require(num_samples > 0, "robust_feasibility_check: num_samples must be positive");
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const double gamma = mdp.discount();
    const NormOrder p = norm_order_of(unc);
    std::mt19937_64 rng(rng_seed);
    FeasibilityReport rep;
    rep.samples = num_samples;
    for (int n = 0; n < num_samples; ++n) {
        for (int s = 0; s < S; ++s) {
            Eigen::VectorXd r_shift(A);
            Eigen::MatrixXd p_shift(A, S);
            if (const auto* b = std::get_if<BallUncertainty>(&unc)) {
                r_shift = sample_in_ball(A, b->alpha_r(s), p, rng);
                const Eigen::VectorXd flat = sample_in_ball(static_cast<Eigen::Index>(A) * S, b->alpha_p(s), p, rng);
                p_shift = Eigen::Map<const Eigen::MatrixXd>(flat.data(), A, S);
            } else {
                const auto& sa = std::get<SaBallUncertainty>(unc);
                for (int a = 0; a < A; ++a) {
                    r_shift(a) = sample_in_ball(1, sa.alpha_r(s, a), p, rng)(0);
                    p_shift.row(a) = sample_in_ball(S, sa.alpha_p(s, a), p, rng).transpose();
                }
            }
            const Eigen::VectorXd r_row = mdp.reward().row(s).transpose() + r_shift;
            const Eigen::MatrixXd p_rows = mdp.kernel_slice(s) + p_shift;
            const double backup = pi.row(s).dot((r_row + gamma * (p_rows * v)).transpose());
            const double viol = v(s) - backup;
            if (viol > rep.max_violation) {
                rep.max_violation = viol;
                rep.worst_state = s;
            }
        }
    }
    return rep;
}

/// Robust greedy step with its robust evaluation.
struct RobustGreedy {
    Policy policy;
    RobustEvaluation evaluation;
};

/**
 * Greedy policy for the robust evaluation operator.
 *
 * (s,a)-rectangular: deterministic argmax of the per-action robust backups.
 * s-rectangular: the best of the deterministic policies and of the iterates of
 * projected supergradient ascent over the simplex, where the numerical worst
 * case at each iterate supplies the supergradient.
 */
inline RobustGreedy robust_greedy_numeric(const TabularMdp& mdp, const Uncertainty& unc, const ValueFn& v,
                                          const InnerMinConfig& cfg = {}) {
    validate_uncertainty(unc, mdp);
    detail::check_value(mdp, v);
    cfg.validate();
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const double gamma = mdp.discount();
    Eigen::MatrixXd probs = Eigen::MatrixXd::Zero(S, A);
    RobustEvaluation eval{ValueFn(S), 0};

    if (std::holds_alternative<SaBallUncertainty>(unc)) {
        QFn scores(S, A);
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                Eigen::VectorXd unit = Eigen::VectorXd::Zero(A);
                unit(a) = 1.0;
                const auto wc = detail::robust_state_min(mdp, unc, unit, v, s, cfg);
                scores(s, a) = wc.value;
                eval.unconverged_solves += wc.unconverged;
            }
        }
        Policy pi = greedy_from_q(scores);
        for (int s = 0; s < S; ++s) eval.value(s) = scores.row(s).maxCoeff();
        return {std::move(pi), std::move(eval)};
    }

    for (int s = 0; s < S; ++s) {
        Eigen::VectorXd pi_s = Eigen::VectorXd::Constant(A, 1.0 / A);
        Eigen::VectorXd best_pi = pi_s;
        double best_val = -std::numeric_limits<double>::infinity();
        int best_unconverged = 0;
        // vertices first: the ascent below approaches a vertex only asymptotically
        for (int a = 0; a < A; ++a) {
            Eigen::VectorXd unit = Eigen::VectorXd::Zero(A);
            unit(a) = 1.0;
            const auto wc = detail::robust_state_min(mdp, unc, unit, v, s, cfg);
            if (wc.value > best_val) {
                best_val = wc.value;
                best_pi = unit;
                best_unconverged = wc.unconverged;
            }
        }
        const double scale = std::max(1.0, mdp.reward().row(s).cwiseAbs().maxCoeff() + gamma * v.cwiseAbs().maxCoeff());
        for (int it = 0; it < cfg.greedy_iters; ++it) {
            const auto wc = detail::robust_state_min(mdp, unc, pi_s, v, s, cfg);
            if (wc.value > best_val) {
                best_val = wc.value;
                best_pi = pi_s;
                best_unconverged = wc.unconverged;
            }
            const Eigen::VectorXd r_row = mdp.reward().row(s).transpose() + wc.reward_shift;
            const Eigen::MatrixXd p_rows = mdp.kernel_slice(s) + wc.transition_shift;
            const Eigen::VectorXd super = r_row + gamma * (p_rows * v);
            const double step = 1.0 / (scale * std::sqrt(static_cast<double>(it + 1)));
            pi_s = project_simplex(pi_s + step * super);
        }
        probs.row(s) = best_pi.transpose();
        eval.value(s) = best_val;
        eval.unconverged_solves += best_unconverged;
    }
    return {Policy(std::move(probs)), std::move(eval)};
}

} // namespace r2plan

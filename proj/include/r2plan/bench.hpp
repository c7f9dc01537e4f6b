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

// Library side of the r2plan command-line tool: every subcommand returns a CSV table.

#include "r2plan/csv.hpp"
#include "r2plan/environments.hpp"
#include "r2plan/planners.hpp"
#include "r2plan/policy_gradient.hpp"
#include "r2plan/r2_operators.hpp"
#include "r2plan/robust_oracle.hpp"
#include "r2plan/uncertainty.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace r2plan {

struct BenchOptions {
    std::string mdp = "gridworld"; ///< "gridworld" or a path to an MDP file
    std::optional<double> gamma;   ///< overrides the model's discount
    double theta = 1e-3;
    double alpha = 1e-3;           ///< reward radius
    std::optional<double> beta;    ///< transition radius, 1e-5 when unset
    NormOrder norm = NormOrder::L2;
    std::string rect = "s";        ///< "s" or "sa"
    int m = 1;
    int seeds = 5;
    std::optional<std::string> family; ///< restricts pe/mpi to one of vanilla, r2, robust
    std::uint64_t seed = 0;

    std::string sweep_param = "alpha";
    std::vector<double> sweep_values; ///< empty: per-parameter default grid

    double pg_learning_rate = 1.0;
    int pg_steps = 1000;

    bool quick = false; ///< verify: reduced sample counts

    double beta_or_default() const { return beta.value_or(1e-5); }
};

inline constexpr double kDefaultBeta = 1e-5;

inline const std::vector<double>& default_sweep_values(const std::string& param) {
    static const std::vector<double> alpha{1e-1, 5e-2, 1e-2, 5e-3, 1e-3, 0.0};
    static const std::vector<double> beta{1e-2, 5e-3, 1e-3, 1e-4, 1e-5, 0.0};
    return param == "beta" ? beta : alpha;
}

namespace detail {

inline void check_options(const BenchOptions& o) {
    require(o.rect == "s" || o.rect == "sa", "--rect must be 's' or 'sa'");
    require(o.theta > 0.0, "--theta must be positive");
    require(o.alpha >= 0.0 && o.beta_or_default() >= 0.0, "radii must be nonnegative");
    require(o.m >= 1, "--m must be at least 1");
    require(o.seeds >= 1, "--seeds must be at least 1");
    if (o.family)
        require(*o.family == "vanilla" || *o.family == "r2" || *o.family == "robust",
                "--family must be vanilla, r2 or robust");
}

inline TabularMdp load_bench_mdp(const BenchOptions& o) {
    const double gamma = o.gamma.value_or(0.9);
    if (o.mdp == "gridworld") return make_gridworld(5, 1.0, 10.0, gamma);
    TabularMdp mdp = load_mdp(o.mdp);
    if (!o.gamma) return mdp;
    return TabularMdp(mdp.transition(), mdp.reward(), gamma, mdp.initial_dist());
}

inline Uncertainty bench_uncertainty(const BenchOptions& o, int S, int A, double alpha, double beta) {
    if (o.rect == "sa") return SaBallUncertainty::uniform(S, A, alpha, beta, o.norm);
    return BallUncertainty::uniform(S, alpha, beta, o.norm);
}

inline InnerMinConfig inner_for_seed(std::uint64_t seed) {
    InnerMinConfig cfg;
    cfg.seed = seed;
    return cfg;
}

inline OperatorFamily make_family(const std::string& name, const Uncertainty& unc, std::uint64_t seed) {
    if (name == "vanilla") return VanillaFamily{};
    if (name == "r2") {
        R2Config cfg;
        cfg.uncertainty = unc;
        return R2Family{cfg};
    }
    return RobustNumericFamily{unc, inner_for_seed(seed)};
}

inline double sup_diff(const ValueFn& a, const ValueFn& b) { return (a - b).cwiseAbs().maxCoeff(); }

inline std::string yes_no(bool b) { return b ? "true" : "false"; }

/// Thread cap from R2PLAN_THREADS; defaults to the hardware concurrency.
inline int thread_budget() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("R2PLAN_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) n = static_cast<int>(v);
    }
    return std::max(1, n);
}

/// Runs body(i) for i in [0, n) on at most thread_budget() threads. The first exception is rethrown.
inline void parallel_for(int n, const std::function<void(int)>& body) {
    const int workers = std::min(n, thread_budget());
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    errors[static_cast<std::size_t>(i)] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct FamilyRuns {
    std::vector<double> times;
    int iterations = 0;
    bool converged = true;
    int inner_unconverged = 0;
    ValueFn worst_value; ///< the run farthest from the R2 reference
    double diff_to_r2 = 0.0;
    bool deterministic = true;
};

inline std::pair<double, double> mean_std(const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return {mean, xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0};
}

// Shared body of pe and mpi: per family, `seeds` timed runs compared against the R2 and vanilla references.
inline CsvTable run_families(const BenchOptions& o, bool use_mpi) {
    check_options(o);
    const TabularMdp mdp = load_bench_mdp(o);
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const Uncertainty unc = bench_uncertainty(o, S, A, o.alpha, o.beta_or_default());
    const Policy uniform = Policy::uniform(S, A);
    auto run = [&](const OperatorFamily& f) {
        return use_mpi ? mpi(f, mdp, o.m, o.theta) : policy_eval(f, mdp, uniform, std::nullopt, o.theta);
    };
    const ValueFn v_vanilla = run(VanillaFamily{}).final_value;
    const ValueFn v_r2 = run(make_family("r2", unc, 0)).final_value;

    std::vector<std::string> names{"vanilla", "r2", "robust"};
    if (o.family) names = {*o.family};

    CsvTable table;
    table.header = {"family", "seeds", "time_mean_s", "time_std_s", "iterations", "converged",
                    "inner_unconverged", "objective", "sup_diff_to_r2", "sup_diff_to_vanilla"};
    if (use_mpi) table.header.push_back("deterministic");
    for (const auto& name : names) {
        FamilyRuns fr;
        for (int k = 0; k < o.seeds; ++k) {
            const auto rep = run(make_family(name, unc, o.seed + static_cast<std::uint64_t>(k)));
            fr.times.push_back(rep.wall_time_seconds);
            fr.iterations = std::max(fr.iterations, rep.iterations);
            fr.converged = fr.converged && rep.converged;
            fr.inner_unconverged += rep.inner_unconverged;
            const double d = sup_diff(rep.final_value, v_r2);
            if (k == 0 || d > fr.diff_to_r2) {
                fr.diff_to_r2 = d;
                fr.worst_value = rep.final_value;
            }
            if (rep.final_policy) fr.deterministic = fr.deterministic && rep.final_policy->is_deterministic();
        }
        const auto [mean, sd] = mean_std(fr.times);
        std::vector<std::string> row{name,
                                     std::to_string(o.seeds),
                                     format_real(mean),
                                     format_real(sd),
                                     std::to_string(fr.iterations),
                                     yes_no(fr.converged),
                                     std::to_string(fr.inner_unconverged),
                                     format_real(fr.worst_value.dot(mdp.initial_dist())),
                                     format_real(fr.diff_to_r2),
                                     format_real(sup_diff(fr.worst_value, v_vanilla))};
        if (use_mpi) row.push_back(yes_no(fr.deterministic));
        table.add(std::move(row));
    }
    return table;
}

} // namespace detail

/// Policy evaluation of the uniform policy for each family, timed over `seeds` runs.
inline CsvTable cmd_pe(const BenchOptions& o) { return detail::run_families(o, false); }

/// Modified policy iteration with o.m evaluation sweeps per greedy step, for each family.
inline CsvTable cmd_mpi(const BenchOptions& o) { return detail::run_families(o, true); }

/**
 * Radius sweep: for each value of the swept radius (the other radius is 0), the l2
 * distance between the R2 / robust MPI fixed points and the vanilla one.
 */
inline CsvTable cmd_sweep(const BenchOptions& o) {
    detail::check_options(o);
    detail::require(o.sweep_param == "alpha" || o.sweep_param == "beta", "--param must be alpha or beta");
    const std::vector<double> values = o.sweep_values.empty() ? default_sweep_values(o.sweep_param) : o.sweep_values;
    for (double x : values) detail::require(x >= 0.0 && std::isfinite(x), "sweep radii must be finite and nonnegative");
    const TabularMdp mdp = detail::load_bench_mdp(o);
    const ValueFn v_vanilla = mpi(VanillaFamily{}, mdp, o.m, o.theta).final_value;

    struct Point {
        ValueFn r2, robust;
        int r2_iterations = 0, robust_iterations = 0;
    };
    std::vector<Point> points(values.size());
    detail::parallel_for(static_cast<int>(values.size()), [&](int i) {
        const double x = values[static_cast<std::size_t>(i)];
        const double alpha = o.sweep_param == "alpha" ? x : 0.0;
        const double beta = o.sweep_param == "beta" ? x : 0.0;
        const Uncertainty unc = detail::bench_uncertainty(o, mdp.num_states(), mdp.num_actions(), alpha, beta);
        const auto r2 = mpi(detail::make_family("r2", unc, o.seed), mdp, o.m, o.theta);
        const auto rb = mpi(detail::make_family("robust", unc, o.seed), mdp, o.m, o.theta);
        points[static_cast<std::size_t>(i)] = {r2.final_value, rb.final_value, r2.iterations, rb.iterations};
    });

    CsvTable table;
    table.header = {"param", "value", "r2_distance", "robust_distance", "r2_robust_gap", "r2_iterations",
                    "robust_iterations"};
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto& p = points[i];
        table.add({o.sweep_param, format_real(values[i]), format_real((p.r2 - v_vanilla).norm()),
                   format_real((p.robust - v_vanilla).norm()), format_real((p.r2 - p.robust).norm()),
                   std::to_string(p.r2_iterations), std::to_string(p.robust_iterations)});
    }
    return table;
}

/// Outcome of one verify group.
enum class CheckStatus { Pass, Fail, NotApplicable };

inline std::string to_string(CheckStatus s) {
    switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::NotApplicable: return "not-applicable";
    }
    return "fail";
}

namespace detail {

struct GroupResult {
    CheckStatus status = CheckStatus::Pass;
    std::string detail;
};

inline std::string fmt_pair(const char* name, double x) { return std::string(name) + "=" + format_real(x); }

inline GroupResult verify_conjugate(std::mt19937_64& rng, int samples) {
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    std::exponential_distribution<double> expo(1.0);
    double worst_shift = 0.0, worst_mono = 0.0, worst_fy = 0.0, worst_bf = 0.0;
    for (int n = 2; n <= 4; ++n) {
        Eigen::VectorXd ref = Eigen::VectorXd::NullaryExpr(n, [&] { return expo(rng) + 1e-3; });
        ref /= ref.sum();
        const std::vector<RegularizerKind> kinds{RegularizerKind::neg_shannon(), RegularizerKind::kl(ref),
                                                 RegularizerKind::neg_tsallis()};
        for (const auto& kind : kinds) {
            for (int k = 0; k < samples; ++k) {
                const Eigen::VectorXd q = Eigen::VectorXd::NullaryExpr(n, [&] { return unif(rng); });
                const double c = unif(rng);
                const double conj = omega_conjugate(kind, q);
                worst_shift = std::max(worst_shift, std::abs(omega_conjugate(kind, (q.array() + c).matrix()) - conj - c));
                const Eigen::VectorXd up = q + Eigen::VectorXd::NullaryExpr(n, [&] { return std::abs(unif(rng)); });
                worst_mono = std::max(worst_mono, conj - omega_conjugate(kind, up));
                const Eigen::VectorXd star = omega_conjugate_grad(kind, q);
                worst_fy = std::max(worst_fy, std::abs(star.dot(q) - omega(kind, star) - conj));
            }
            const double step = n == 2 ? 1e-3 : (n == 3 ? 1e-2 : 2e-2);
            const Eigen::VectorXd q = Eigen::VectorXd::NullaryExpr(n, [&] { return unif(rng); });
            worst_bf = std::max(worst_bf, std::abs(omega_conjugate(kind, q) - conjugate_bruteforce(kind, q, step).value) / step);
        }
    }
    const bool ok = worst_shift <= 1e-10 && worst_mono <= 1e-12 && worst_fy <= 1e-10 && worst_bf <= 2.0;
    return {ok ? CheckStatus::Pass : CheckStatus::Fail,
            fmt_pair("shift", worst_shift) + ";" + fmt_pair("monotonicity", worst_mono) + ";" +
                fmt_pair("fenchel_young", worst_fy) + ";" + fmt_pair("bruteforce_steps", worst_bf)};
}

inline GroupResult verify_interval(std::mt19937_64& rng, int samples) {
    std::exponential_distribution<double> expo(1.0);
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) {
        const int n = 2 + k % 5;
        auto draw = [&] {
            Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(n, [&] { return expo(rng) + 1e-3; });
            return Eigen::VectorXd(x / x.sum());
        };
        const Eigen::VectorXd pi = draw();
        for (const auto& kind : {RegularizerKind::neg_shannon(), RegularizerKind::kl(draw()), RegularizerKind::neg_tsallis()}) {
            const IntervalRewardSet set{kind, interval_lower_endpoints(kind, pi).transpose()};
            worst = std::max(worst, std::abs(interval_support(set, 0, pi) - omega(kind, pi)));
        }
    }
    return {worst <= 1e-12 ? CheckStatus::Pass : CheckStatus::Fail, fmt_pair("max_abs_error", worst)};
}

inline GroupResult verify_asm1(std::uint64_t seed, int instances) {
    double worst = 0.0;
    for (int k = 0; k < instances; ++k) {
        const auto mdp = make_random_mdp(3 + k % 4, 2 + k % 3, 0.02 + 0.01 * (k % 4), seed + 1000 + k);
        const double eps = default_asm1_epsilon(mdp.discount());
        const double first =
            (1.0 - mdp.discount() - eps) / (mdp.discount() * std::sqrt(static_cast<double>(mdp.num_states())));
        for (int s = 0; s < mdp.num_states(); ++s) {
            const double oracle = std::min(first, bilinear_min_numeric(mdp.kernel_slice(s), 10, seed + k));
            worst = std::max(worst, std::abs(asm1_radius_bound(mdp, s, eps) - oracle));
        }
    }
    return {worst <= 1e-8 ? CheckStatus::Pass : CheckStatus::Fail, fmt_pair("max_abs_error", worst)};
}

/// The MDP and uncertainty used by the operator-law and equivalence groups.
struct VerifyModel {
    TabularMdp mdp;
    BallUncertainty unc;
    double epsilon;
    bool asm1;
};

inline VerifyModel verify_model(const BenchOptions& o, std::uint64_t seed) {
    TabularMdp mdp = make_random_mdp(5, 3, 0.04, seed + 7, o.gamma.value_or(0.9));
    const double eps = default_asm1_epsilon(mdp.discount());
    BallUncertainty unc = BallUncertainty::uniform(mdp.num_states(), o.alpha, 0.0, o.norm);
    for (int s = 0; s < mdp.num_states(); ++s)
        unc.alpha_p(s) = o.beta ? *o.beta : 0.9 * asm1_radius_bound(mdp, s, eps, o.norm);
    const bool ok = check_asm1(mdp, unc, eps).satisfied;
    return {std::move(mdp), std::move(unc), eps, ok};
}

inline GroupResult verify_operator_laws(const VerifyModel& vm, std::mt19937_64& rng, int pairs) {
    if (!vm.asm1) return {CheckStatus::NotApplicable, "transition radius exceeds the bounded-radius condition"};
    const auto& mdp = vm.mdp;
    R2Config cfg;
    cfg.uncertainty = vm.unc;
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    const double gamma = mdp.discount();
    const double R = std::max(1.0, mdp.reward().cwiseAbs().maxCoeff()) / (1.0 - gamma);
    std::uniform_real_distribution<double> sym(-R, R), pos(0.0, R);
    std::exponential_distribution<double> expo(1.0);
    auto vec = [&](auto& dist) { return ValueFn(ValueFn::NullaryExpr(S, [&] { return dist(rng); })); };
    double mono = 0.0, subdist = 0.0, ratio = 0.0;
    for (int k = 0; k < pairs; ++k) {
        Eigen::MatrixXd p = Eigen::MatrixXd::NullaryExpr(S, A, [&] { return expo(rng); });
        p = p.array().colwise() / p.rowwise().sum().array();
        const Policy pi(p);
        const ValueFn v1 = vec(sym);
        const ValueFn v2 = v1 + vec(pos);
        mono = std::max(mono, (r2_eval_apply(mdp, cfg, pi, v1) - r2_eval_apply(mdp, cfg, pi, v2)).maxCoeff());
        mono = std::max(mono, (r2_opt_apply(mdp, cfg, v1).value - r2_opt_apply(mdp, cfg, v2).value).maxCoeff());
        // the shift law needs ||v + c1|| >= ||v||, which holds for v >= 0 and c > 0
        const ValueFn u = vec(pos);
        const double c = 0.1 + pos(rng);
        const ValueFn uc = (u.array() + c).matrix();
        subdist = std::max(subdist, (r2_eval_apply(mdp, cfg, pi, uc).array() -
                                     r2_eval_apply(mdp, cfg, pi, u).array() - gamma * c).maxCoeff());
        subdist = std::max(subdist, (r2_opt_apply(mdp, cfg, uc).value.array() -
                                     r2_opt_apply(mdp, cfg, u).value.array() - gamma * c).maxCoeff());
        const ValueFn w = vec(sym);
        const double d = (v1 - w).cwiseAbs().maxCoeff();
        ratio = std::max(ratio, (r2_eval_apply(mdp, cfg, pi, v1) - r2_eval_apply(mdp, cfg, pi, w)).cwiseAbs().maxCoeff() / d);
        ratio = std::max(ratio, (r2_opt_apply(mdp, cfg, v1).value - r2_opt_apply(mdp, cfg, w).value).cwiseAbs().maxCoeff() / d);
    }
    const double limit = 1.0 - vm.epsilon;
    const bool ok = mono <= 1e-8 && subdist <= 1e-8 && ratio <= limit + 1e-8;
    return {ok ? CheckStatus::Pass : CheckStatus::Fail,
            fmt_pair("monotonicity_violation", mono) + ";" + fmt_pair("subdistributivity_violation", subdist) + ";" +
                fmt_pair("contraction_ratio", ratio) + ";" + fmt_pair("limit", limit)};
}

inline GroupResult verify_equivalence(const VerifyModel& vm, std::mt19937_64& rng, int samples) {
    const auto& mdp = vm.mdp;
    R2Config cfg;
    cfg.uncertainty = vm.unc;
    const int S = mdp.num_states();
    const int A = mdp.num_actions();
    std::uniform_real_distribution<double> unif(-10.0, 10.0);
    std::exponential_distribution<double> expo(1.0);
    double per_apply = 0.0;
    for (int k = 0; k < samples; ++k) {
        Eigen::MatrixXd p = Eigen::MatrixXd::NullaryExpr(S, A, [&] { return expo(rng); });
        p = p.array().colwise() / p.rowwise().sum().array();
        const Policy pi(p);
        const ValueFn v = ValueFn::NullaryExpr(S, [&] { return unif(rng); });
        const auto robust = robust_eval_apply_numeric(mdp, vm.unc, pi, v);
        per_apply = std::max(per_apply, sup_diff(robust.value, r2_eval_apply(mdp, cfg, pi, v)));
    }
    std::string detail = fmt_pair("per_application", per_apply);
    bool ok = per_apply <= 1e-7;
    // both evaluation operators contract when gamma (1 + max alpha_p |S|^{1/q}) < 1
    const double growth = mdp.discount() * (1.0 + vm.unc.alpha_p.maxCoeff() *
                                                       std::pow(static_cast<double>(S), inverse_exponent(dual(vm.unc.norm_order))));
    if (growth < 1.0) {
        const Policy pi = Policy::uniform(S, A);
        const auto r2 = policy_eval(R2Family{cfg}, mdp, pi, std::nullopt, 1e-10);
        const auto rb = policy_eval(RobustNumericFamily{vm.unc, {}}, mdp, pi, std::nullopt, 1e-10);
        const double fp = sup_diff(r2.final_value, rb.final_value);
        detail += ";" + fmt_pair("fixed_point", fp);
        ok = ok && fp <= 1e-5;
    } else {
        detail += ";fixed_point=skipped";
    }
    return {ok ? CheckStatus::Pass : CheckStatus::Fail, detail};
}

inline GroupResult verify_gradient(std::mt19937_64& rng, std::uint64_t seed, int configs) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> radius(0.0, 0.5);
    double worst = 0.0;
    for (int k = 0; k < configs; ++k) {
        const auto mdp = make_random_mdp(2 + k % 5, 2 + k % 3, 0.0, seed + 2000 + k);
        BallUncertainty unc = BallUncertainty::uniform(mdp.num_states(), 0.0, 0.0);
        for (int s = 0; s < mdp.num_states(); ++s) unc.alpha_r(s) = radius(rng);
        const SoftmaxPolicyParams params{
            Eigen::MatrixXd::NullaryExpr(mdp.num_states(), mdp.num_actions(), [&] { return normal(rng); })};
        worst = std::max(worst, *gradient_check(mdp, unc, params).fd_max_rel_error);
    }
    return {worst <= 1e-4 ? CheckStatus::Pass : CheckStatus::Fail, fmt_pair("fd_max_rel_error", worst)};
}

} // namespace detail

/// Runs the property groups; the table has one row per group (group, status, detail).
inline CsvTable cmd_verify(const BenchOptions& o) {
    detail::require(o.alpha >= 0.0 && o.beta_or_default() >= 0.0, "radii must be nonnegative");
    const int scale = o.quick ? 1 : 5;
    std::mt19937_64 rng(o.seed);
    const auto vm = detail::verify_model(o, o.seed);
    std::vector<std::pair<std::string, detail::GroupResult>> groups;
    groups.emplace_back("conjugate", detail::verify_conjugate(rng, 20 * scale));
    groups.emplace_back("interval_duality", detail::verify_interval(rng, 20 * scale));
    groups.emplace_back("asm1", detail::verify_asm1(o.seed, 4 * scale));
    groups.emplace_back("operator_laws", detail::verify_operator_laws(vm, rng, 20 * scale));
    groups.emplace_back("equivalence", detail::verify_equivalence(vm, rng, 4 * scale));
    groups.emplace_back("gradient", detail::verify_gradient(rng, o.seed, 4 * scale));
    CsvTable table;
    table.header = {"group", "status", "detail"};
    for (auto& [name, res] : groups) table.add({name, to_string(res.status), res.detail});
    return table;
}

/// True when no group in a verify table failed.
inline bool verify_passed(const CsvTable& table) {
    for (std::size_t r = 0; r < table.rows.size(); ++r)
        if (table.rows[r][static_cast<std::size_t>(table.column("status"))] == "fail") return false;
    return true;
}

/// Result of cmd_pg: the trace table plus the optional gradient check.
struct PgOutput {
    CsvTable trace;
    std::optional<double> fd_max_rel_error;
};

/**
 * Reward-robust policy gradient from the uniform policy. Uses alpha as the reward
 * radius; a nonzero transition radius is rejected.
 */
inline PgOutput cmd_pg(const BenchOptions& o, bool check) {
    detail::check_options(o);
    if (o.beta && *o.beta != 0.0)
        throw UnsupportedConfig("pg: policy gradient supports reward uncertainty only; pass --beta 0 or omit it");
    detail::require(o.pg_learning_rate > 0.0, "--lr must be positive");
    detail::require(o.pg_steps >= 0, "--steps must be nonnegative");
    const TabularMdp mdp = detail::load_bench_mdp(o);
    const Uncertainty unc = BallUncertainty::uniform(mdp.num_states(), o.alpha, 0.0, o.norm);
    const auto init = SoftmaxPolicyParams::uniform(mdp.num_states(), mdp.num_actions());
    PgOutput out;
    if (check) out.fd_max_rel_error = gradient_check(mdp, unc, init).fd_max_rel_error;
    const auto run = pg_train(mdp, unc, init, o.pg_learning_rate, o.pg_steps);
    out.trace.header = {"step", "objective", "grad_norm"};
    for (std::size_t k = 0; k < run.objective_trace.size(); ++k) {
        const double gn = k < run.gradient_norms.size()
                              ? run.gradient_norms[k]
                              : reward_robust_gradient(mdp, unc, run.params).gradient.norm();
        out.trace.add({std::to_string(k), format_real(run.objective_trace[k]), format_real(gn)});
    }
    return out;
}

} // namespace r2plan

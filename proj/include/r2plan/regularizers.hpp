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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace r2plan {

enum class RegularizerFamily { NegShannon, KL, NegTsallis };

/// Policy regularizer Omega over the action simplex. KL carries its strictly positive reference d.
class RegularizerKind {
public:
    static RegularizerKind neg_shannon() { return RegularizerKind(RegularizerFamily::NegShannon, {}); }
    static RegularizerKind neg_tsallis() { return RegularizerKind(RegularizerFamily::NegTsallis, {}); }
    static RegularizerKind kl(Eigen::VectorXd reference) {
        detail::require(reference.size() > 0 && (reference.array() > 0.0).all() &&
                            std::abs(reference.sum() - 1.0) <= kStochasticTol,
                        "KL reference must be strictly positive and sum to 1");
        return RegularizerKind(RegularizerFamily::KL, std::move(reference));
    }

    RegularizerFamily family() const noexcept { return family_; }
    const Eigen::VectorXd& reference() const noexcept { return reference_; }

private:
    RegularizerKind(RegularizerFamily f, Eigen::VectorXd ref) : family_(f), reference_(std::move(ref)) {}

    RegularizerFamily family_;
    Eigen::VectorXd reference_;
};

namespace detail {

inline void check_kind_dims(const RegularizerKind& kind, Eigen::Index n) {
    if (kind.family() == RegularizerFamily::KL)
        require(kind.reference().size() == n, "KL reference length does not match action count");
}

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

inline double log_sum_exp(const Eigen::VectorXd& z) {
    const double m = z.maxCoeff();
    return m + std::log((z.array() - m).exp().sum());
}

inline Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
    Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp();
    return e / e.sum();
}

} // namespace detail

/// Support set and threshold of the sparsemax map.
struct SparsemaxThreshold {
    double tau = 0.0;
    std::vector<int> support; ///< actions a with q(a) > tau, in decreasing q order
};

/**
 * Sorted-threshold construction: with q sorted decreasingly (ties by action
 * index), action a_(i) belongs to the support when 1 + i q_(i) > sum_{j<=i} q_(j);
 * tau = (sum_{support} q - 1) / |support|.
 */
inline SparsemaxThreshold sparsemax_threshold(const Eigen::VectorXd& q) {
    const auto n = static_cast<int>(q.size());
    detail::require(n > 0, "sparsemax: empty score vector");
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return q(a) > q(b); });
    SparsemaxThreshold out;
    double cumsum = 0.0;
    double support_sum = 0.0;
    for (int i = 1; i <= n; ++i) {
        const double qi = q(order[static_cast<std::size_t>(i - 1)]);
        cumsum += qi;
        if (1.0 + i * qi > cumsum) {
            out.support.push_back(order[static_cast<std::size_t>(i - 1)]);
            support_sum += qi;
        }
    }
    out.tau = (support_sum - 1.0) / static_cast<double>(out.support.size());
    return out;
}

/// Omega(pi_s). Zero-probability entries contribute 0 to the entropy terms.
inline double omega(const RegularizerKind& kind, const Eigen::VectorXd& pi_s) {
    detail::check_kind_dims(kind, pi_s.size());
    switch (kind.family()) {
    case RegularizerFamily::NegShannon: {
        double acc = 0.0;
        for (Eigen::Index a = 0; a < pi_s.size(); ++a) acc += detail::xlogx(pi_s(a));
        return acc;
    }
    case RegularizerFamily::KL: {
        double acc = 0.0;
        for (Eigen::Index a = 0; a < pi_s.size(); ++a) {
            if (pi_s(a) > 0.0) acc += pi_s(a) * std::log(pi_s(a) / kind.reference()(a));
        }
        return acc;
    }
    case RegularizerFamily::NegTsallis: return 0.5 * (pi_s.squaredNorm() - 1.0);
    }
    return 0.0;
}

/// Omega*(q) = max_{pi in simplex} <pi, q> - Omega(pi), in closed form.
inline double omega_conjugate(const RegularizerKind& kind, const Eigen::VectorXd& q) {
    detail::check_kind_dims(kind, q.size());
    switch (kind.family()) {
    case RegularizerFamily::NegShannon: return detail::log_sum_exp(q);
    case RegularizerFamily::KL:
        return detail::log_sum_exp((q.array() + kind.reference().array().log()).matrix());
    case RegularizerFamily::NegTsallis: {
        const auto th = sparsemax_threshold(q);
        double acc = 0.0;
        for (int a : th.support) acc += q(a) * q(a) - th.tau * th.tau;
        return 0.5 + 0.5 * acc;
    }
    }
    return 0.0;
}

/// grad Omega*(q): the unique maximizer (softmax, reference-weighted softmax, sparsemax).
inline Eigen::VectorXd omega_conjugate_grad(const RegularizerKind& kind, const Eigen::VectorXd& q) {
    detail::check_kind_dims(kind, q.size());
    switch (kind.family()) {
    case RegularizerFamily::NegShannon: return detail::softmax(q);
    case RegularizerFamily::KL:
        return detail::softmax((q.array() + kind.reference().array().log()).matrix());
    case RegularizerFamily::NegTsallis: {
        const double tau = sparsemax_threshold(q).tau;
        return (q.array() - tau).max(0.0).matrix();
    }
    }
    return {};
}

/// Grid maximizer of <pi, q> - Omega(pi).
struct ConjugateSolution {
    double value = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd argmax;
};

/**
 * Enumerates the simplex grid {k * grid_step} and keeps the best point.
 * Limited to at most 4 actions.
 */
inline ConjugateSolution conjugate_bruteforce(const RegularizerKind& kind, const Eigen::VectorXd& q,
                                              double grid_step) {
    const auto n = q.size();
    if (n < 1 || n > 4)
        throw UnsupportedConfig("conjugate_bruteforce: action count must be in [1, 4], got " +
                                std::to_string(n));
    detail::require(grid_step > 0.0 && grid_step <= 1.0, "conjugate_bruteforce: grid_step must be in (0,1]");
    detail::check_kind_dims(kind, n);
    const long ticks = std::lround(1.0 / grid_step);
    ConjugateSolution best;
    Eigen::VectorXd pi(n);
    std::vector<long> counts(static_cast<std::size_t>(n), 0);

    auto visit = [&]() {
        for (Eigen::Index a = 0; a < n; ++a) pi(a) = static_cast<double>(counts[static_cast<std::size_t>(a)]) / ticks;
        const double val = pi.dot(q) - omega(kind, pi);
        if (val > best.value) {
            best.value = val;
            best.argmax = pi;
        }
    };
    // counts[0..n-2] enumerated, last coordinate takes the remainder
    auto recurse = [&](auto&& self, Eigen::Index idx, long remaining) -> void {
        if (idx == n - 1) {
            counts[static_cast<std::size_t>(idx)] = remaining;
            visit();
            return;
        }
        for (long k = 0; k <= remaining; ++k) {
            counts[static_cast<std::size_t>(idx)] = k;
            self(self, idx + 1, remaining - k);
        }
    };
    recurse(recurse, 0, ticks);
    return best;
}

} // namespace r2plan

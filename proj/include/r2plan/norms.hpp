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
#include <functional>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

namespace r2plan {

/// The three lp orders used for uncertainty balls. L1 and Linf are dual to each other.
enum class NormOrder { L1, L2, Linf };

constexpr NormOrder dual(NormOrder p) noexcept {
    switch (p) {
    case NormOrder::L1: return NormOrder::Linf;
    case NormOrder::Linf: return NormOrder::L1;
    default: return NormOrder::L2;
    }
}

/// 1/q for the given order, so that n^{1/q} = pow(n, inverse_exponent(q)).
constexpr double inverse_exponent(NormOrder q) noexcept {
    switch (q) {
    case NormOrder::L1: return 1.0;
    case NormOrder::L2: return 0.5;
    default: return 0.0;
    }
}

inline std::string_view to_string(NormOrder p) noexcept {
    switch (p) {
    case NormOrder::L1: return "l1";
    case NormOrder::L2: return "l2";
    default: return "linf";
    }
}

inline NormOrder parse_norm_order(std::string_view name) {
    if (name == "l1") return NormOrder::L1;
    if (name == "l2") return NormOrder::L2;
    if (name == "linf") return NormOrder::Linf;
    throw InvalidInput("unknown norm order '" + std::string(name) + "' (expected l1, l2 or linf)");
}

/// lp norm of any dense Eigen expression, entries taken as a flat vector.
template <typename Derived>
double lp_norm(const Eigen::DenseBase<Derived>& x, NormOrder p) {
    if (x.size() == 0) return 0.0;
    switch (p) {
    case NormOrder::L1: return x.derived().array().abs().sum();
    case NormOrder::L2: return std::sqrt(x.derived().array().square().sum());
    default: return x.derived().array().abs().maxCoeff();
    }
}

/// Euclidean projection onto the probability simplex (sort-and-threshold).
inline Eigen::VectorXd project_simplex(const Eigen::VectorXd& y) {
    const auto n = y.size();
    detail::require(n > 0, "project_simplex: empty vector");
    std::vector<double> sorted(y.data(), y.data() + n);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumsum = 0.0;
    double tau = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        cumsum += sorted[k];
        const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
        if (sorted[k] - t > 0.0) tau = t;
    }
    Eigen::VectorXd x = (y.array() - tau).max(0.0);
    // renormalize away the rounding drift of the cumulative sum
    const double s = x.sum();
    if (s > 0.0) x /= s;
    return x;
}

/// Projection onto the l1 ball of the given radius (Duchi et al. style, via the simplex threshold).
inline Eigen::VectorXd project_l1_ball(const Eigen::VectorXd& y, double radius) {
    if (radius <= 0.0) return Eigen::VectorXd::Zero(y.size());
    const Eigen::ArrayXd a = y.array().abs();
    if (a.sum() <= radius) return y;
    std::vector<double> sorted(a.data(), a.data() + a.size());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumsum = 0.0;
    double tau = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        cumsum += sorted[k];
        const double t = (cumsum - radius) / static_cast<double>(k + 1);
        if (sorted[k] - t > 0.0) tau = t;
    }
    return (y.array().sign() * (a - tau).max(0.0)).matrix();
}

/// Projection onto {x : ||x||_p <= radius}.
inline Eigen::VectorXd project_ball(const Eigen::VectorXd& y, double radius, NormOrder p) {
    if (radius <= 0.0) return Eigen::VectorXd::Zero(y.size());
    switch (p) {
    case NormOrder::L1: return project_l1_ball(y, radius);
    case NormOrder::L2: {
        const double n = y.norm();
        return n <= radius ? y : Eigen::VectorXd(y * (radius / n));
    }
    default: return y.cwiseMax(-radius).cwiseMin(radius);
    }
}

} // namespace r2plan

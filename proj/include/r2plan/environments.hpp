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
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace r2plan {

/// Grid-world action indices.
enum GridAction : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

/// Cell (row, col) of a side x side grid-world maps to state row * side + col; the sink is side * side.
inline int grid_state(int side, int row, int col) { return row * side + col; }

/**
 * Grid-world with two terminal goals and an absorbing sink.
 *
 * States are the side^2 cells plus one zero-reward sink. Actions move
 * deterministically up/down/left/right; moves off the grid stay in place. The
 * small goal sits at (0, side-1), the large goal at (side-1, side-1); both pay
 * their reward under every action and then move to the sink. mu0 is uniform
 * over the non-goal cells.
 */
inline TabularMdp make_gridworld(int side = 5, double goal_small_reward = 1.0, double goal_large_reward = 10.0,
                                 double gamma = 0.9) {
    detail::require(side >= 2, "make_gridworld: side must be at least 2");
    const int cells = side * side;
    const int S = cells + 1;
    const int A = 4;
    const int sink = cells;
    const int small_goal = grid_state(side, 0, side - 1);
    const int large_goal = grid_state(side, side - 1, side - 1);

    Eigen::MatrixXd transition = Eigen::MatrixXd::Zero(S * A, S);
    Eigen::MatrixXd reward = Eigen::MatrixXd::Zero(S, A);
    Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(S);
    constexpr int drow[4] = {-1, 1, 0, 0};
    constexpr int dcol[4] = {0, 0, -1, 1};

    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            const auto row = static_cast<Eigen::Index>(s) * A + a;
            if (s == sink || s == small_goal || s == large_goal) {
                transition(row, sink) = 1.0;
                continue;
            }
            const int r = s / side;
            const int c = s % side;
            const int nr = r + drow[a];
            const int nc = c + dcol[a];
            const bool inside = nr >= 0 && nr < side && nc >= 0 && nc < side;
            transition(row, inside ? grid_state(side, nr, nc) : s) = 1.0;
        }
    }
    reward.row(small_goal).setConstant(goal_small_reward);
    reward.row(large_goal).setConstant(goal_large_reward);
    for (int s = 0; s < cells; ++s) {
        if (s != small_goal && s != large_goal) mu0(s) = 1.0 / (cells - 2);
    }
    return TabularMdp(std::move(transition), std::move(reward), gamma, std::move(mu0));
}

/**
 * Random MDP with every kernel entry at least min_transition_prob:
 * rows are min_p + (1 - S min_p) * Dirichlet(1). Rewards uniform in [0,1],
 * mu0 uniform. Bitwise reproducible for a given seed on a given platform.
 */
inline TabularMdp make_random_mdp(int num_states, int num_actions, double min_transition_prob, std::uint64_t rng_seed,
                                  double gamma = 0.9) {
    detail::require(num_states > 0 && num_actions > 0, "make_random_mdp: sizes must be positive");
    detail::require(min_transition_prob >= 0.0, "make_random_mdp: min_transition_prob must be nonnegative");
    if (min_transition_prob * num_states >= 1.0)
        throw InvalidInput("make_random_mdp: min_transition_prob * num_states must be < 1");
    std::mt19937_64 rng(rng_seed);
    std::exponential_distribution<double> expo(1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double free_mass = 1.0 - min_transition_prob * num_states;
    Eigen::MatrixXd transition(static_cast<Eigen::Index>(num_states) * num_actions, num_states);
    for (Eigen::Index row = 0; row < transition.rows(); ++row) {
        Eigen::RowVectorXd e = Eigen::RowVectorXd::NullaryExpr(num_states, [&] { return expo(rng); });
        e /= e.sum();
        transition.row(row) = (min_transition_prob + free_mass * e.array()).matrix();
        // put the rounding residue on the largest entry so the row sums to 1
        Eigen::Index k = 0;
        transition.row(row).maxCoeff(&k);
        transition(row, k) += 1.0 - transition.row(row).sum();
    }
    Eigen::MatrixXd reward = Eigen::MatrixXd::NullaryExpr(num_states, num_actions, [&] { return unif(rng); });
    Eigen::VectorXd mu0 = Eigen::VectorXd::Constant(num_states, 1.0 / num_states);
    return TabularMdp(std::move(transition), std::move(reward), gamma, std::move(mu0));
}

/// MDP document as JSON; only nonzero entries are listed.
inline nlohmann::json mdp_to_json(const TabularMdp& mdp) {
    nlohmann::json doc;
    doc["num_states"] = mdp.num_states();
    doc["num_actions"] = mdp.num_actions();
    doc["discount"] = mdp.discount();
    auto& tr = doc["transition"] = nlohmann::json::array();
    for (int s = 0; s < mdp.num_states(); ++s)
        for (int a = 0; a < mdp.num_actions(); ++a)
            for (int n = 0; n < mdp.num_states(); ++n)
                if (const double p = mdp.prob(s, a, n); p != 0.0) tr.push_back({s, a, n, p});
    auto& rw = doc["reward"] = nlohmann::json::array();
    for (int s = 0; s < mdp.num_states(); ++s)
        for (int a = 0; a < mdp.num_actions(); ++a)
            if (const double r = mdp.reward()(s, a); r != 0.0) rw.push_back({s, a, r});
    auto& init = doc["initial_dist"] = nlohmann::json::array();
    for (int s = 0; s < mdp.num_states(); ++s)
        if (const double p = mdp.initial_dist()(s); p != 0.0) init.push_back({s, p});
    return doc;
}

namespace detail {

inline const nlohmann::json& field(const nlohmann::json& doc, const char* name) {
    if (!doc.contains(name)) throw ParseError(name, "missing field");
    return doc.at(name);
}

inline int index_field(const nlohmann::json& entry, std::size_t pos, int bound, const std::string& where) {
    const auto& x = entry.at(pos);
    if (!x.is_number_integer()) throw ParseError(where, "index " + std::to_string(pos) + " is not an integer");
    const auto i = x.get<long long>();
    if (i < 0 || i >= bound) throw ParseError(where, "index " + std::to_string(i) + " out of range");
    return static_cast<int>(i);
}

inline double real_field(const nlohmann::json& entry, std::size_t pos, const std::string& where) {
    const auto& x = entry.at(pos);
    if (!x.is_number()) throw ParseError(where, "value is not a number");
    return x.get<double>();
}

inline const nlohmann::json& entry_list(const nlohmann::json& doc, const char* name) {
    const auto& list = field(doc, name);
    if (!list.is_array()) throw ParseError(name, "expected a list");
    return list;
}

inline void check_arity(const nlohmann::json& entry, std::size_t n, const std::string& where) {
    if (!entry.is_array() || entry.size() != n)
        throw ParseError(where, "expected a list of " + std::to_string(n) + " numbers");
}

} // namespace detail

/// Parses and validates an MDP document. Syntax errors report line and column.
inline TabularMdp mdp_from_json_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') { ++line; col = 1; } else { ++col; }
        }
        throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(col), "invalid JSON");
    }
    if (!doc.is_object()) throw ParseError("document", "expected an object");

    auto positive_int = [&](const char* name) {
        const auto& x = detail::field(doc, name);
        if (!x.is_number_integer() || x.get<long long>() <= 0) throw ParseError(name, "expected a positive integer");
        return static_cast<int>(x.get<long long>());
    };
    const int S = positive_int("num_states");
    const int A = positive_int("num_actions");
    const auto& disc = detail::field(doc, "discount");
    if (!disc.is_number()) throw ParseError("discount", "expected a number");

    Eigen::MatrixXd transition = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(S) * A, S);
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> seen_t = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(transition.rows(), S, false);
    const auto& tr = detail::entry_list(doc, "transition");
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const std::string where = "transition[" + std::to_string(i) + "]";
        detail::check_arity(tr[i], 4, where);
        const int s = detail::index_field(tr[i], 0, S, where);
        const int a = detail::index_field(tr[i], 1, A, where);
        const int n = detail::index_field(tr[i], 2, S, where);
        const auto row = static_cast<Eigen::Index>(s) * A + a;
        if (seen_t(row, n)) throw ParseError(where, "duplicate entry");
        seen_t(row, n) = true;
        transition(row, n) = detail::real_field(tr[i], 3, where);
    }

    Eigen::MatrixXd reward = Eigen::MatrixXd::Zero(S, A);
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> seen_r = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(S, A, false);
    const auto& rw = detail::entry_list(doc, "reward");
    for (std::size_t i = 0; i < rw.size(); ++i) {
        const std::string where = "reward[" + std::to_string(i) + "]";
        detail::check_arity(rw[i], 3, where);
        const int s = detail::index_field(rw[i], 0, S, where);
        const int a = detail::index_field(rw[i], 1, A, where);
        if (seen_r(s, a)) throw ParseError(where, "duplicate entry");
        seen_r(s, a) = true;
        reward(s, a) = detail::real_field(rw[i], 2, where);
    }

    Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(S);
    std::vector<bool> seen_m(static_cast<std::size_t>(S), false);
    const auto& init = detail::entry_list(doc, "initial_dist");
    for (std::size_t i = 0; i < init.size(); ++i) {
        const std::string where = "initial_dist[" + std::to_string(i) + "]";
        detail::check_arity(init[i], 2, where);
        const int s = detail::index_field(init[i], 0, S, where);
        if (seen_m[static_cast<std::size_t>(s)]) throw ParseError(where, "duplicate entry");
        seen_m[static_cast<std::size_t>(s)] = true;
        mu0(s) = detail::real_field(init[i], 1, where);
    }
    return TabularMdp(std::move(transition), std::move(reward), disc.get<double>(), std::move(mu0));
}

/// Writes the MDP document. Numbers use the shortest round-trip decimal form (at most 17 digits).
inline void save_mdp(const TabularMdp& mdp, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("save_mdp: cannot open '" + path + "' for writing");
    out << mdp_to_json(mdp).dump(1) << '\n';
    if (!out) throw Error("save_mdp: write to '" + path + "' failed");
}

inline TabularMdp load_mdp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("load_mdp: cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return mdp_from_json_text(buf.str());
}

} // namespace r2plan

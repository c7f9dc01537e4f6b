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

// r2plan: benchmarks and property checks for R2 and robust planning.
// Exit codes: 0 success, 1 a property check failed, 2 bad usage or input.

#include "r2plan/r2plan.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw r2plan::InvalidInput("--values: not a number: '" + item + "'");
        out.push_back(x);
    }
    if (out.empty()) throw r2plan::InvalidInput("--values: empty list");
    return out;
}

void emit(const r2plan::CsvTable& table, const std::string& out_path) {
    if (out_path.empty()) {
        table.write(std::cout);
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw r2plan::InvalidInput("cannot write " + out_path);
    table.write(out);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"r2plan: R2-regularized and robust planning benchmarks"};
    app.require_subcommand(1);

    r2plan::BenchOptions opt;
    std::string norm = "l2";
    std::string out_path;
    std::string family;
    std::string values;
    double beta = 0.0;
    double gamma = 0.0;
    bool check = false;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--mdp", opt.mdp, "'gridworld' or an MDP JSON file");
        sub->add_option("--gamma", gamma, "discount override")->check(CLI::Range(0.0, 1.0));
        sub->add_option("--theta", opt.theta, "stopping threshold");
        sub->add_option("--alpha", opt.alpha, "reward radius");
        sub->add_option("--beta", beta, "transition radius (default 1e-5)");
        sub->add_option("--norm", norm, "l1, l2 or linf");
        sub->add_option("--rect", opt.rect, "s or sa");
        sub->add_option("--m", opt.m, "evaluation sweeps per greedy step");
        sub->add_option("--seeds", opt.seeds, "timed repetitions");
        sub->add_option("--family", family, "vanilla, r2 or robust");
        sub->add_option("--out", out_path, "CSV path (default stdout)");
        sub->add_option("--seed", opt.seed, "base RNG seed");
    };
    auto* pe = app.add_subcommand("pe", "policy evaluation of the uniform policy");
    auto* mpi = app.add_subcommand("mpi", "modified policy iteration");
    auto* sweep = app.add_subcommand("sweep", "distance to the vanilla solution across radii");
    auto* verify = app.add_subcommand("verify", "run the property checks");
    auto* pg = app.add_subcommand("pg", "reward-robust policy gradient");
    for (auto* sub : {pe, mpi, sweep, verify, pg}) common(sub);
    sweep->add_option("--param", opt.sweep_param, "alpha or beta");
    sweep->add_option("--values", values, "comma-separated radii");
    verify->add_flag("--quick", opt.quick, "fewer samples");
    pg->add_option("--lr", opt.pg_learning_rate, "learning rate");
    pg->add_option("--steps", opt.pg_steps, "gradient steps");
    pg->add_flag("--check", check, "report the finite-difference gradient error");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    auto* active = app.get_subcommands().front();
    try {
        opt.norm = r2plan::parse_norm_order(norm);
        if (active->count("--beta")) opt.beta = beta;
        if (active->count("--gamma")) opt.gamma = gamma;
        if (!family.empty()) opt.family = family;
        if (!values.empty()) opt.sweep_values = parse_values(values);

        if (active == pe) {
            emit(r2plan::cmd_pe(opt), out_path);
        } else if (active == mpi) {
            emit(r2plan::cmd_mpi(opt), out_path);
        } else if (active == sweep) {
            emit(r2plan::cmd_sweep(opt), out_path);
        } else if (active == verify) {
            const auto table = r2plan::cmd_verify(opt);
            emit(table, out_path);
            return r2plan::verify_passed(table) ? 0 : 1;
        } else {
            const auto res = r2plan::cmd_pg(opt, check);
            emit(res.trace, out_path);
            if (res.fd_max_rel_error) {
                std::cerr << "fd_max_rel_error=" << r2plan::format_real(*res.fd_max_rel_error) << '\n';
                if (*res.fd_max_rel_error > 1e-4) return 1;
            }
        }
    } catch (const r2plan::InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const r2plan::UnsupportedConfig& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const r2plan::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

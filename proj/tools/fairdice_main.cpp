#include "fairdice/dataset.hpp"
#include "fairdice/environments.hpp"
#include "fairdice/evaluation.hpp"
#include "fairdice/experiments.hpp"
#include "fairdice/oracle.hpp"
#include "fairdice/solver.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace fairdice;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

TabularPolicy parse_policy_spec(const MOMDP& m, const std::string& spec) {
    if (spec == "uniform")
        return uniform_policy(m);
    if (spec.rfind("optimality:", 0) == 0) {
        const double target = std::stod(spec.substr(std::string("optimality:").size()));
        return mixture_policy_for_optimality(m, target,
                                             std::vector<double>(m.n_objectives, 1.0));
    }
    if (spec == "optimal")
        return optimal_scalar_policy(m, std::vector<double>(m.n_objectives, 1.0));
    throw std::runtime_error("unknown policy spec: " + spec +
                             " (expected uniform, optimal or optimality:<t>)");
}

Occupancy bandit_data(double d1, double d2) {
    Occupancy d = Occupancy::zeros(1, 2);
    d.d[0][0] = d1;
    d.d[0][1] = d2;
    return d;
}

int run_oracle(const std::string& problem, const std::string& variant_tag) {
    PrimalProblem prob;
    if (problem == "appendix-b") {
        prob.m = make_bandit({{1.0, 4.0}, {3.0, 1.0}});
        prob.variant = PrimalVariant::P1;
    } else if (problem == "appendix-c1") {
        prob.m = make_bandit({{1.0, 4.0}, {3.0, 1.0}});
        prob.variant = PrimalVariant::P2_reg;
        prob.d_data = bandit_data(0.7, 0.3);
        prob.beta = 1.0;
    } else {
        // A JSON file: {"momdp": {...}, "d_data": [[...]], "beta": ...,
        // "alpha": ..., "weights": [...], "divergence": "chi2"}
        nlohmann::json j = nlohmann::json::parse(read_file(problem));
        prob.m = momdp_from_json(j.at("momdp").dump());
        if (j.contains("d_data")) {
            Occupancy d;
            d.d = j.at("d_data").get<std::vector<std::vector<double>>>();
            prob.d_data = d;
        }
        if (j.contains("beta"))
            prob.beta = j.at("beta").get<double>();
        if (j.contains("alpha"))
            prob.alpha = j.at("alpha").get<double>();
        if (j.contains("weights"))
            prob.weights = j.at("weights").get<std::vector<double>>();
        if (j.contains("divergence"))
            prob.divergence = divergence_from_string(j.at("divergence").get<std::string>());
    }

    if (variant_tag == "p1")
        prob.variant = PrimalVariant::P1;
    else if (variant_tag == "p2reg")
        prob.variant = PrimalVariant::P2_reg;
    else if (variant_tag == "p3reg")
        prob.variant = PrimalVariant::P3_reg;
    else if (!variant_tag.empty())
        throw std::runtime_error("unknown variant: " + variant_tag);

    if (prob.variant == PrimalVariant::P3_reg && prob.weights.empty()) {
        // Default to the implicit weights of the unregularized solve.
        PrimalProblem p1 = prob;
        p1.variant = PrimalVariant::P1;
        const auto sol = solve_primal(p1);
        const AlphaFairness utility(prob.alpha);
        for (double k : sol.k)
            prob.weights.push_back(utility.u_prime(k));
    }

    const auto sol = solve_primal(prob);
    nlohmann::json out;
    out["d"] = sol.d.d;
    out["k"] = sol.k;
    out["welfare"] = sol.objective;
    out["iterations"] = sol.iterations;
    out["converged"] = sol.converged;
    std::cout << out.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"FairDICE: offline multi-objective RL via stationary-distribution "
                 "correction (tabular toolkit)"};
    app.require_subcommand(1);

    // gen-env
    auto* gen = app.add_subcommand("gen-env", "construct a benchmark MOMDP");
    gen->require_subcommand(1);
    auto* four = gen->add_subcommand("four-room", "multi-objective four-room gridworld");
    int fr_objectives = 3;
    double fr_slip = 0.1, fr_gamma = 0.8;
    std::string fr_out = "env.json";
    four->add_option("--objectives", fr_objectives, "3 or 8 goals")
        ->check(CLI::IsMember({3, 8}));
    four->add_option("--slip", fr_slip, "slip probability");
    four->add_option("--gamma", fr_gamma, "discount factor");
    four->add_option("--out", fr_out, "output path");
    auto* rnd = gen->add_subcommand("random-momdp", "random 50-state MOMDP");
    std::uint64_t rnd_seed = 0;
    std::string rnd_out = "env.json";
    rnd->add_option("--seed", rnd_seed, "construction seed");
    rnd->add_option("--out", rnd_out, "output path");

    // collect
    auto* collect = app.add_subcommand("collect", "sample an offline dataset");
    std::string c_env, c_policy = "uniform", c_out = "data.jsonl";
    int c_n = 300, c_horizon = 100;
    std::uint64_t c_seed = 0;
    collect->add_option("--env", c_env, "environment JSON")->required();
    collect->add_option("--policy", c_policy, "uniform | optimal | optimality:<t>");
    collect->add_option("--n", c_n, "number of trajectories");
    collect->add_option("--horizon", c_horizon, "maximum episode length");
    collect->add_option("--seed", c_seed, "sampling seed");
    collect->add_option("--out", c_out, "output path");

    // solve
    auto* solve_cmd = app.add_subcommand("solve", "run the dual solver on a dataset");
    std::string s_env, s_data, s_out = "solution.json", s_div = "chi2", s_mode = "mle";
    double s_alpha = 1.0, s_beta = 0.01;
    solve_cmd->add_option("--env", s_env, "environment JSON")->required();
    solve_cmd->add_option("--data", s_data, "dataset JSONL")->required();
    solve_cmd->add_option("--alpha", s_alpha, "fairness parameter");
    solve_cmd->add_option("--beta", s_beta, "regularization strength");
    solve_cmd->add_option("--divergence", s_div, "chi2 | soft_chi2");
    solve_cmd->add_option("--e-mode", s_mode, "exact | mle | sampled");
    solve_cmd->add_option("--out", s_out, "output path");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a policy exactly");
    std::string e_env, e_policy, e_out;
    bool e_normalized = true;
    eval_cmd->add_option("--env", e_env, "environment JSON")->required();
    eval_cmd->add_option("--policy", e_policy, "solution JSON (from solve)")->required();
    eval_cmd->add_option("--out", e_out, "metrics output path (default stdout)");
    eval_cmd->add_flag("--normalized,!--unnormalized", e_normalized,
                       "occupancy-normalized returns (default) or plain discounted sums");

    // oracle
    auto* oracle_cmd = app.add_subcommand("oracle", "primal-space oracle for small instances");
    std::string o_problem, o_variant;
    oracle_cmd->add_option("--problem", o_problem, "appendix-b | appendix-c1 | file.json")
        ->required();
    oracle_cmd->add_option("--variant", o_variant, "p1 | p2reg | p3reg");

    // experiment
    auto* exp_cmd = app.add_subcommand("experiment", "run a study end to end");
    std::string x_name, x_config, x_out;
    int x_threads = 0;
    std::vector<std::uint64_t> x_seeds;
    exp_cmd->add_option("name", x_name,
                        "counterexample | four-room | random-sweep | perturb-mu | perturb-grid")
        ->required();
    exp_cmd->add_option("--config", x_config, "JSON config overriding the defaults");
    exp_cmd->add_option("--out", x_out, "output directory");
    exp_cmd->add_option("--threads", x_threads, "worker threads (0 = hardware)");
    exp_cmd->add_option("--seeds", x_seeds, "seed list override");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            if (four->parsed()) {
                FourRoomConfig cfg = FourRoomConfig::standard(fr_objectives);
                cfg.slip_prob = fr_slip;
                cfg.gamma = fr_gamma;
                const auto env = build_four_room(cfg);
                for (const auto& w : env.warnings)
                    std::cerr << "warning: " << w << "\n";
                save_momdp(env.momdp, fr_out);
                std::cout << "wrote " << fr_out << " (" << env.momdp.n_states
                          << " states)\n";
            } else {
                RandomMOMDPConfig cfg;
                cfg.seed = rnd_seed;
                const auto env = build_random_momdp(cfg);
                save_momdp(env.momdp, rnd_out);
                std::cout << "wrote " << rnd_out << " (" << env.momdp.n_states
                          << " states)\n";
            }
            return 0;
        }

        if (collect->parsed()) {
            const MOMDP m = load_momdp(c_env);
            const auto pi = parse_policy_spec(m, c_policy);
            const auto ds = sample_trajectories(m, pi, c_n, c_horizon, c_seed);
            save_dataset(ds, c_out);
            std::cout << "wrote " << c_out << " (" << ds.trajectories.size()
                      << " trajectories)\n";
            return 0;
        }

        if (solve_cmd->parsed()) {
            const MOMDP m = load_momdp(s_env);
            const auto ds = load_dataset(s_data);
            for (const auto& w : check_dataset_against_env(ds, m))
                std::cerr << "warning: " << w << "\n";
            const auto est = empirical_estimates(ds, m);
            SolverConfig sc;
            sc.alpha = s_alpha;
            sc.beta = s_beta;
            sc.divergence = divergence_from_string(s_div);
            sc.e_mode = e_mode_from_string(s_mode);
            const auto sol = solve(sc, m, est);
            for (const auto& w : sol.diagnostics.warnings)
                std::cerr << "warning: " << w << "\n";
            std::ofstream out(s_out);
            out << solution_to_json(sol, sc) << "\n";
            std::cout << "wrote " << s_out << " (converged="
                      << (sol.diagnostics.converged ? "yes" : "no") << ", iters="
                      << sol.diagnostics.iterations << ")\n";
            return 0;
        }

        if (eval_cmd->parsed()) {
            const MOMDP m = load_momdp(e_env);
            const auto sol = solution_from_json(read_file(e_policy));
            const auto eval = evaluate_policy(m, sol.policy, 1e-6, e_normalized);
            nlohmann::json out;
            out["returns"] = eval.returns;
            out["nsw"] = eval.metrics.nsw;
            out["utilitarian"] = eval.metrics.utilitarian;
            out["jain"] = eval.metrics.jain;
            if (e_out.empty()) {
                std::cout << out.dump(2) << "\n";
            } else {
                std::ofstream f(e_out);
                f << out.dump(2) << "\n";
                std::cout << "wrote " << e_out << "\n";
            }
            return 0;
        }

        if (oracle_cmd->parsed())
            return run_oracle(o_problem, o_variant);

        if (exp_cmd->parsed()) {
            ExperimentConfig cfg = x_config.empty()
                                       ? default_config(x_name)
                                       : config_from_json(read_file(x_config));
            if (!x_out.empty())
                cfg.out_dir = x_out;
            if (x_threads > 0)
                cfg.threads = x_threads;
            if (!x_seeds.empty())
                cfg.seeds = x_seeds;
            return run_experiment(cfg, std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

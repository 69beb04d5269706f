#include "fairdice/experiments.hpp"

#include "fairdice/dataset.hpp"
#include "fairdice/evaluation.hpp"
#include "fairdice/oracle.hpp"
#include "fairdice/rng.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace fairdice {

namespace {

void parallel_for(int n_jobs, int threads, const std::function<void(int)>& fn) {
    if (threads <= 0)
        threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min(threads, n_jobs);
    if (threads <= 1) {
        for (int i = 0; i < n_jobs; ++i)
            fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            int i;
            while ((i = next.fetch_add(1)) < n_jobs)
                fn(i);
        });
    for (auto& th : pool)
        th.join();
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

SolverConfig solver_config(const ExperimentConfig& cfg, double alpha, double beta) {
    SolverConfig sc;
    sc.alpha = alpha;
    sc.beta = beta;
    sc.divergence = divergence_from_string(cfg.divergence);
    sc.e_mode = e_mode_from_string(cfg.e_mode);
    return sc;
}

ResultRow evaluated_row(const std::string& name, std::uint64_t seed, double alpha,
                        double beta, double sigma, const MOMDP& m,
                        const TabularPolicy& pi, const ExperimentConfig& cfg, double df,
                        long iters, bool converged) {
    const auto eval = evaluate_policy(m, pi, cfg.clamp_eps, cfg.normalized_returns);
    ResultRow row;
    row.experiment = name;
    row.seed = seed;
    row.alpha = alpha;
    row.beta = beta;
    row.sigma = sigma;
    row.returns = eval.returns;
    row.nsw = eval.metrics.nsw;
    row.util = eval.metrics.utilitarian;
    row.jain = eval.metrics.jain;
    row.df = df;
    row.iters = iters;
    row.converged = converged;
    return row;
}

void maybe_save_solution(const ExperimentConfig& cfg, const SolverConfig& sc,
                         const DualSolution& sol, const std::string& name) {
    if (!cfg.save_solutions)
        return;
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream out(cfg.out_dir + "/" + name);
    out << solution_to_json(sol, sc) << "\n";
}

struct RandomSeedContext {
    BuiltEnv env;
    TabularPolicy behavior;
    EmpiricalEstimates est;
};

RandomSeedContext make_random_context(const ExperimentConfig& cfg, std::uint64_t seed) {
    RandomSeedContext ctx;
    RandomMOMDPConfig rc;
    rc.seed = seed;
    ctx.env = build_random_momdp(rc);
    const std::vector<double> unit_weights(ctx.env.momdp.n_objectives, 1.0);
    ctx.behavior =
        mixture_policy_for_optimality(ctx.env.momdp, cfg.behavior_optimality, unit_weights);
    const int n = cfg.n_trajectories > 0 ? cfg.n_trajectories : 100;
    const int horizon = cfg.horizon > 0 ? cfg.horizon : 50;
    const auto ds = sample_trajectories(ctx.env.momdp, ctx.behavior, n, horizon,
                                        Rng::splitmix64(seed));
    ctx.est = empirical_estimates(ds, ctx.env.momdp);
    return ctx;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v)
        s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double ci95_halfwidth(const std::vector<double>& v) {
    if (v.size() < 2)
        return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v)
        ss += (x - m) * (x - m);
    const double sd = std::sqrt(ss / (static_cast<double>(v.size()) - 1.0));
    return 1.96 * sd / std::sqrt(static_cast<double>(v.size()));
}

} // namespace

ExperimentConfig default_config(const std::string& experiment) {
    ExperimentConfig cfg;
    cfg.experiment = experiment;
    if (experiment == "counterexample") {
        // no knobs
    } else if (experiment == "four-room") {
        cfg.seeds = {1, 2, 3, 4, 5};
        cfg.n_trajectories = 300;
        cfg.horizon = 100;
        cfg.beta = 0.01;
        cfg.save_solutions = true;
    } else if (experiment == "random-sweep") {
        cfg.seeds.resize(50);
        for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
            cfg.seeds[i] = i + 1;
        cfg.alpha_grid = {0.0, 0.5, 1.0, 1.25};
        cfg.beta_grid = {0.0001, 0.0005, 0.001, 0.005, 0.01, 0.05, 0.1,
                         0.5,    1.0,    5.0,   10.0,  50.0, 100.0};
        cfg.n_trajectories = 100;
        cfg.horizon = 50;
        cfg.normalized_returns = true;
    } else if (experiment == "perturb-mu") {
        cfg.seeds.resize(20);
        for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
            cfg.seeds[i] = i + 1;
        cfg.sigma_grid = {0.0, 0.05, 0.1, 0.2, 0.4, 0.8};
        cfg.beta = 0.01;
        cfg.n_trajectories = 100;
        cfg.horizon = 50;
        cfg.normalized_returns = true;
    } else if (experiment == "perturb-grid") {
        cfg.seeds = {1};
        cfg.mu_factor_grid = {0.25, 0.5, 1.0, 2.0, 4.0};
        cfg.n_trajectories = 300;
        cfg.horizon = 100;
        cfg.beta = 0.01;
        cfg.save_solutions = true;
    } else {
        throw std::invalid_argument("unknown experiment: " + experiment);
    }
    return cfg;
}

ExperimentConfig config_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ExperimentConfig cfg = default_config(j.at("experiment").get<std::string>());
    auto opt = [&j](const char* key, auto& field) {
        if (j.contains(key))
            field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    opt("out_dir", cfg.out_dir);
    opt("seeds", cfg.seeds);
    opt("alpha_grid", cfg.alpha_grid);
    opt("beta_grid", cfg.beta_grid);
    opt("sigma_grid", cfg.sigma_grid);
    opt("mu_factor_grid", cfg.mu_factor_grid);
    opt("alpha", cfg.alpha);
    opt("beta", cfg.beta);
    opt("divergence", cfg.divergence);
    opt("e_mode", cfg.e_mode);
    opt("n_trajectories", cfg.n_trajectories);
    opt("horizon", cfg.horizon);
    opt("gamma_four_room", cfg.gamma_four_room);
    opt("slip", cfg.slip);
    opt("behavior_optimality", cfg.behavior_optimality);
    opt("clamp_eps", cfg.clamp_eps);
    opt("mu_clamp", cfg.mu_clamp);
    opt("normalized_returns", cfg.normalized_returns);
    opt("save_solutions", cfg.save_solutions);
    opt("threads", cfg.threads);
    return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["experiment"] = cfg.experiment;
    j["out_dir"] = cfg.out_dir;
    j["seeds"] = cfg.seeds;
    j["alpha_grid"] = cfg.alpha_grid;
    j["beta_grid"] = cfg.beta_grid;
    j["sigma_grid"] = cfg.sigma_grid;
    j["mu_factor_grid"] = cfg.mu_factor_grid;
    j["alpha"] = cfg.alpha;
    j["beta"] = cfg.beta;
    j["divergence"] = cfg.divergence;
    j["e_mode"] = cfg.e_mode;
    j["n_trajectories"] = cfg.n_trajectories;
    j["horizon"] = cfg.horizon;
    j["gamma_four_room"] = cfg.gamma_four_room;
    j["slip"] = cfg.slip;
    j["behavior_optimality"] = cfg.behavior_optimality;
    j["clamp_eps"] = cfg.clamp_eps;
    j["mu_clamp"] = cfg.mu_clamp;
    j["normalized_returns"] = cfg.normalized_returns;
    j["save_solutions"] = cfg.save_solutions;
    j["threads"] = cfg.threads;
    return j.dump(2);
}

int cmd_counterexample(std::ostream& log) {
    int failures = 0;
    auto check = [&](bool ok, const std::string& name) {
        log << (ok ? "[PASS] " : "[FAIL] ") << name << "\n";
        if (!ok)
            ++failures;
    };
    auto near = [](double a, double b, double tol) { return std::abs(a - b) <= tol; };

    // Two-action bandit with rewards [1,4] and [3,1]; log utilities.
    const MOMDP bandit = make_bandit({{1.0, 4.0}, {3.0, 1.0}});
    const AlphaFairness log_utility(1.0);

    PrimalProblem p1;
    p1.m = bandit;
    p1.variant = PrimalVariant::P1;
    p1.alpha = 1.0;
    const auto sol_p1 = solve_primal(p1, 1e-12);
    check(near(sol_p1.d.d[0][0], 0.5834, 1e-3) && near(sol_p1.d.d[0][1], 0.4166, 1e-3),
          "unregularized bandit: optimal stationary distribution (0.5834, 0.4166)");
    check(near(sol_p1.k[0], 1.8332, 1e-3) && near(sol_p1.k[1], 2.7500, 1e-3),
          "unregularized bandit: objective returns (1.8332, 2.7500)");

    const double mu1 = log_utility.u_prime(sol_p1.k[0]);
    const double mu2 = log_utility.u_prime(sol_p1.k[1]);
    check(near(mu1, 0.5455, 1e-3) && near(mu2, 0.3636, 1e-3),
          "unregularized bandit: implicit weights (0.5455, 0.3636)");
    const double scal1 = 1.0 * mu1 + 4.0 * mu2;
    const double scal2 = 3.0 * mu1 + 1.0 * mu2;
    check(near(scal1, 2.0, 1e-3) && near(scal2, 2.0, 1e-3),
          "unregularized bandit: both scalarized rewards equal 2.000");

    const auto grid = grid_welfare_max(p1, 1e-4);
    check(near(grid.d.d[0][0], sol_p1.d.d[0][0], 1e-3),
          "unregularized bandit: exhaustive grid brackets the optimizer");

    // Regularized bandit: chi^2, beta = 1, data distribution (0.7, 0.3).
    Occupancy d_D = Occupancy::zeros(1, 2);
    d_D.d[0][0] = 0.7;
    d_D.d[0][1] = 0.3;
    const auto est = exact_estimates(bandit, d_D);

    SolverConfig sc;
    sc.beta = 1.0;
    sc.alpha = 1.0;
    sc.divergence = Divergence::chi2;
    sc.e_mode = EMode::exact_model;
    const auto dual = solve(sc, bandit, est);
    check(near(dual.mu[0], 0.5959, 1e-3) && near(dual.mu[1], 0.3352, 1e-3),
          "regularized bandit: dual solve recovers weights (0.5959, 0.3352)");
    check(near(dual.d_star.d[0][0], 0.6609, 1e-3) && near(dual.d_star.d[0][1], 0.3390, 1e-3),
          "regularized bandit: dual solve recovers occupancy (0.6609, 0.3390)");

    PrimalProblem p2;
    p2.m = bandit;
    p2.variant = PrimalVariant::P2_reg;
    p2.alpha = 1.0;
    p2.beta = 1.0;
    p2.d_data = d_D;
    const auto sol_p2 = solve_primal(p2, 1e-12);
    check(near(sol_p2.d.d[0][0], 0.6609, 1e-3) && near(sol_p2.d.d[0][1], 0.3390, 1e-3),
          "regularized bandit: primal oracle agrees (0.6609, 0.3390)");

    PrimalProblem p3r = p2;
    p3r.variant = PrimalVariant::P3_reg;
    p3r.weights = dual.mu;
    const auto sol_p3 = solve_primal(p3r, 1e-12);
    check(near(sol_p3.d.d[0][0], dual.d_star.d[0][0], 1e-3),
          "regularized bandit: frozen-weight oracle matches the adaptive solution");

    const auto fixed = solve_fixed(sc, dual.mu, bandit, est);
    check(near(fixed.d_star.d[0][0], dual.d_star.d[0][0], 1e-4),
          "regularized bandit: frozen-weight dual matches the adaptive solution");

    // Vanishing regularization with the unregularized weights: the linear
    // objective is flat between the two vertices.
    {
        PrimalProblem flat = p3r;
        flat.beta = 1e-6;
        flat.weights = {mu1, mu2};
        auto value_at = [&](double a0) {
            Occupancy d = Occupancy::zeros(1, 2);
            d.d[0][0] = a0;
            d.d[0][1] = 1.0 - a0;
            double obj = 0.0;
            for (int a = 0; a < 2; ++a) {
                double w = 0.0;
                for (int i = 0; i < 2; ++i)
                    w += flat.weights[i] * bandit.reward[0][a][i];
                obj += d.d[0][a] * w;
                obj -= flat.beta * d_D.d[0][a] *
                       f_eval(flat.divergence, d.d[0][a] / d_D.d[0][a]);
            }
            return obj;
        };
        check(std::abs(value_at(1.0) - value_at(0.0)) < 1e-6,
              "flat linear objective: vertex gap below 1e-6 at beta = 1e-6");
    }

    // Stronger regularization pulls the solution toward the data.
    {
        SolverConfig sc10 = sc;
        sc10.beta = 10.0;
        const auto dual10 = solve(sc10, bandit, est);
        const double dev1 = std::abs(dual.d_star.d[0][0] - 0.7);
        const double dev10 = std::abs(dual10.d_star.d[0][0] - 0.7);
        check(dev10 < dev1, "regularized bandit: beta = 10 stays closer to the data");
    }

    // alpha = 0 is served by the fixed-weight (utilitarian) path.
    {
        SolverConfig sc0 = sc;
        sc0.alpha = 0.0;
        const auto util = solve(sc0, bandit, est);
        check(util.diagnostics.utilitarian_fixed,
              "alpha = 0 routes to the fixed utilitarian solve");
    }

    return failures;
}

ExperimentResult cmd_four_room(const ExperimentConfig& cfg,
                               ExperimentResult* eight_objectives) {
    FourRoomConfig fr = FourRoomConfig::standard(3);
    fr.gamma = cfg.gamma_four_room;
    fr.slip_prob = cfg.slip;
    const BuiltEnv env = build_four_room(fr);
    const int n = cfg.n_trajectories > 0 ? cfg.n_trajectories : 300;
    const int horizon = cfg.horizon > 0 ? cfg.horizon : 100;

    ExperimentResult result;
    result.n_objectives = 3;
    const TabularPolicy behavior = uniform_policy(env.momdp);

    for (std::uint64_t seed : cfg.seeds) {
        const auto ds = sample_trajectories(env.momdp, behavior, n, horizon, seed);
        const auto est = empirical_estimates(ds, env.momdp);

        const SolverConfig sc = solver_config(cfg, 1.0, cfg.beta);
        const auto nsw_sol = solve(sc, env.momdp, est);
        const auto util_sol =
            solve_fixed(sc, std::vector<double>(3, 1.0), env.momdp, est);

        result.rows.push_back(evaluated_row("four-room/behavior", seed, 0.0, 0.0, 0.0,
                                            env.momdp, behavior, cfg, 0.0, 0, true));
        result.rows.push_back(evaluated_row(
            "four-room/utilitarian", seed, 0.0, cfg.beta, 0.0, env.momdp, util_sol.policy,
            cfg, f_divergence(util_sol.d_star, est.d_D, sc.divergence),
            util_sol.diagnostics.iterations, util_sol.diagnostics.converged));
        result.rows.push_back(evaluated_row(
            "four-room/fairdice_nsw", seed, 1.0, cfg.beta, 0.0, env.momdp, nsw_sol.policy,
            cfg, f_divergence(nsw_sol.d_star, est.d_D, sc.divergence),
            nsw_sol.diagnostics.iterations, nsw_sol.diagnostics.converged));

        maybe_save_solution(cfg, sc, nsw_sol,
                            "solution_nsw_seed" + std::to_string(seed) + ".json");
        maybe_save_solution(cfg, sc, util_sol,
                            "solution_util_seed" + std::to_string(seed) + ".json");
    }

    if (eight_objectives) {
        FourRoomConfig fr8 = FourRoomConfig::standard(8);
        fr8.gamma = cfg.gamma_four_room;
        fr8.slip_prob = cfg.slip;
        const BuiltEnv env8 = build_four_room(fr8);
        const TabularPolicy behavior8 = uniform_policy(env8.momdp);
        eight_objectives->n_objectives = 8;
        for (std::uint64_t seed : cfg.seeds) {
            const auto ds8 = sample_trajectories(env8.momdp, behavior8, n, horizon, seed);
            const auto est8 = empirical_estimates(ds8, env8.momdp);
            const SolverConfig sc = solver_config(cfg, 1.0, cfg.beta);
            const auto sol8 = solve(sc, env8.momdp, est8);
            eight_objectives->rows.push_back(evaluated_row(
                "four-room-8obj/behavior", seed, 0.0, 0.0, 0.0, env8.momdp, behavior8,
                cfg, 0.0, 0, true));
            eight_objectives->rows.push_back(evaluated_row(
                "four-room-8obj/fairdice_nsw", seed, 1.0, cfg.beta, 0.0, env8.momdp,
                sol8.policy, cfg, f_divergence(sol8.d_star, est8.d_D, sc.divergence),
                sol8.diagnostics.iterations, sol8.diagnostics.converged));
        }
    }
    return result;
}

ExperimentResult cmd_random_sweep(const ExperimentConfig& cfg) {
    const int n_seeds = static_cast<int>(cfg.seeds.size());
    std::vector<RandomSeedContext> contexts(n_seeds);
    std::vector<std::string> context_failures(n_seeds);
    parallel_for(n_seeds, cfg.threads, [&](int i) {
        try {
            contexts[i] = make_random_context(cfg, cfg.seeds[i]);
        } catch (const std::exception& e) {
            context_failures[i] = e.what();
        }
    });

    struct Job {
        int seed_idx;
        double alpha, beta;
    };
    std::vector<Job> jobs;
    for (int i = 0; i < n_seeds; ++i) {
        if (!context_failures[i].empty())
            continue;
        for (double alpha : cfg.alpha_grid)
            for (double beta : cfg.beta_grid)
                jobs.push_back({i, alpha, beta});
    }

    ExperimentResult result;
    result.n_objectives = 3;
    for (int i = 0; i < n_seeds; ++i)
        if (!context_failures[i].empty())
            result.failures.push_back("seed " + std::to_string(cfg.seeds[i]) + ": " +
                                      context_failures[i]);

    std::vector<ResultRow> job_rows(jobs.size());
    std::vector<std::string> job_failures(jobs.size());
    parallel_for(static_cast<int>(jobs.size()), cfg.threads, [&](int j) {
        const auto& job = jobs[j];
        const auto& ctx = contexts[job.seed_idx];
        try {
            const SolverConfig sc = solver_config(cfg, job.alpha, job.beta);
            const auto sol = solve(sc, ctx.env.momdp, ctx.est);
            job_rows[j] = evaluated_row(
                "random-sweep", cfg.seeds[job.seed_idx], job.alpha, job.beta, 0.0,
                ctx.env.momdp, sol.policy, cfg,
                f_divergence(sol.d_star, ctx.est.d_D, sc.divergence),
                sol.diagnostics.iterations, sol.diagnostics.converged);
        } catch (const std::exception& e) {
            job_failures[j] = "seed " + std::to_string(cfg.seeds[job.seed_idx]) +
                              " alpha " + fmt(job.alpha) + " beta " + fmt(job.beta) +
                              ": " + e.what();
        }
    });

    for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (!job_failures[j].empty())
            result.failures.push_back(job_failures[j]);
        else
            result.rows.push_back(std::move(job_rows[j]));
    }

    // Reference rows per seed: the behavior policy itself and the policy
    // implied by the dataset (the strong-regularization limit).
    for (int i = 0; i < n_seeds; ++i) {
        if (!context_failures[i].empty())
            continue;
        const auto& ctx = contexts[i];
        result.rows.push_back(evaluated_row("random-sweep/behavior", cfg.seeds[i], 0.0,
                                            0.0, 0.0, ctx.env.momdp, ctx.behavior, cfg,
                                            0.0, 0, true));
        const TabularPolicy data_policy =
            policy_from_occupancy(ctx.est.d_D, uniform_policy(ctx.env.momdp));
        result.rows.push_back(evaluated_row("random-sweep/behavior_data", cfg.seeds[i],
                                            0.0, 0.0, 0.0, ctx.env.momdp, data_policy,
                                            cfg, 0.0, 0, true));
    }
    return result;
}

ExperimentResult cmd_perturb_mu(const ExperimentConfig& cfg) {
    const int n_seeds = static_cast<int>(cfg.seeds.size());
    ExperimentResult result;
    result.n_objectives = 3;
    std::vector<std::vector<ResultRow>> rows_per_seed(n_seeds);
    std::vector<std::string> failures(n_seeds);
    std::atomic<long> clamp_events{0};

    parallel_for(n_seeds, cfg.threads, [&](int i) {
        try {
            const std::uint64_t seed = cfg.seeds[i];
            const auto ctx = make_random_context(cfg, seed);
            const SolverConfig sc = solver_config(cfg, 1.0, cfg.beta);
            const auto base = solve(sc, ctx.env.momdp, ctx.est);

            for (std::size_t si = 0; si < cfg.sigma_grid.size(); ++si) {
                const double sigma = cfg.sigma_grid[si];
                std::vector<double> mu = base.mu;
                if (sigma > 0.0) {
                    Rng rng = Rng::stream(Rng::splitmix64(seed) ^ 0x70657274ULL, si);
                    for (auto& x : mu) {
                        x *= 1.0 + sigma * rng.gaussian();
                        if (x < cfg.mu_clamp) {
                            x = cfg.mu_clamp;
                            clamp_events.fetch_add(1);
                        }
                    }
                }
                const auto fixed = solve_fixed(sc, mu, ctx.env.momdp, ctx.est);
                rows_per_seed[i].push_back(evaluated_row(
                    "perturb-mu", seed, 1.0, cfg.beta, sigma, ctx.env.momdp, fixed.policy,
                    cfg, f_divergence(fixed.d_star, ctx.est.d_D, sc.divergence),
                    fixed.diagnostics.iterations, fixed.diagnostics.converged));
            }
        } catch (const std::exception& e) {
            failures[i] = "seed " + std::to_string(cfg.seeds[i]) + ": " + e.what();
        }
    });

    for (int i = 0; i < n_seeds; ++i) {
        if (!failures[i].empty())
            result.failures.push_back(failures[i]);
        for (auto& r : rows_per_seed[i])
            result.rows.push_back(std::move(r));
    }
    if (clamp_events.load() > 0)
        result.failures.push_back("note: " + std::to_string(clamp_events.load()) +
                                  " perturbed weights hit the positivity clamp");
    return result;
}

ExperimentResult cmd_perturb_grid(const ExperimentConfig& cfg) {
    FourRoomConfig fr = FourRoomConfig::standard(3);
    fr.gamma = cfg.gamma_four_room;
    fr.slip_prob = cfg.slip;
    const BuiltEnv env = build_four_room(fr);
    const int n = cfg.n_trajectories > 0 ? cfg.n_trajectories : 300;
    const int horizon = cfg.horizon > 0 ? cfg.horizon : 100;
    const std::uint64_t seed = cfg.seeds.empty() ? 1 : cfg.seeds[0];

    const auto ds = sample_trajectories(env.momdp, uniform_policy(env.momdp), n, horizon, seed);
    const auto est = empirical_estimates(ds, env.momdp);
    const SolverConfig sc = solver_config(cfg, 1.0, cfg.beta);
    const auto base = solve(sc, env.momdp, est);
    maybe_save_solution(cfg, sc, base, "solution_center.json");

    struct Job {
        double f2, f3;
    };
    std::vector<Job> jobs;
    for (double f2 : cfg.mu_factor_grid)
        for (double f3 : cfg.mu_factor_grid)
            jobs.push_back({f2, f3});

    ExperimentResult result;
    result.n_objectives = 3;
    std::vector<ResultRow> rows(jobs.size());
    std::vector<std::string> failures(jobs.size());
    parallel_for(static_cast<int>(jobs.size()), cfg.threads, [&](int j) {
        try {
            const std::vector<double> mu = {base.mu[0], base.mu[1] * jobs[j].f2,
                                            base.mu[2] * jobs[j].f3};
            const auto fixed = solve_fixed(sc, mu, env.momdp, est);
            ResultRow row = evaluated_row(
                "perturb-grid", seed, 1.0, cfg.beta, 0.0, env.momdp, fixed.policy, cfg,
                f_divergence(fixed.d_star, est.d_D, sc.divergence),
                fixed.diagnostics.iterations, fixed.diagnostics.converged);
            row.mu_factor_2 = jobs[j].f2;
            row.mu_factor_3 = jobs[j].f3;
            rows[j] = std::move(row);
        } catch (const std::exception& e) {
            failures[j] = e.what();
        }
    });
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (!failures[j].empty())
            result.failures.push_back(failures[j]);
        else
            result.rows.push_back(std::move(rows[j]));
    }
    return result;
}

void write_results_csv(const ExperimentResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out << "experiment,seed,alpha,beta,sigma";
    for (int i = 1; i <= result.n_objectives; ++i)
        out << ",ret_" << i;
    out << ",nsw,util,jain,df,iters,converged\n";
    for (const auto& r : result.rows) {
        out << r.experiment << "," << r.seed << "," << fmt(r.alpha) << "," << fmt(r.beta)
            << "," << fmt(r.sigma);
        for (int i = 0; i < result.n_objectives; ++i)
            out << "," << fmt(i < static_cast<int>(r.returns.size()) ? r.returns[i] : 0.0);
        out << "," << fmt(r.nsw) << "," << fmt(r.util) << "," << fmt(r.jain) << ","
            << fmt(r.df) << "," << r.iters << "," << (r.converged ? 1 : 0) << "\n";
    }
}

void write_aggregate_csv(const ExperimentResult& result, const std::string& path) {
    std::map<std::tuple<std::string, double, double, double>, std::vector<const ResultRow*>>
        groups;
    for (const auto& r : result.rows)
        groups[{r.experiment, r.alpha, r.beta, r.sigma}].push_back(&r);

    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out << "experiment,alpha,beta,sigma,n,nsw_mean,nsw_ci95,util_mean,util_ci95,"
           "jain_mean,jain_ci95,df_mean\n";
    for (const auto& [key, rows] : groups) {
        std::vector<double> nsw, util, jain, df;
        for (const auto* r : rows) {
            nsw.push_back(r->nsw);
            util.push_back(r->util);
            jain.push_back(r->jain);
            df.push_back(r->df);
        }
        out << std::get<0>(key) << "," << fmt(std::get<1>(key)) << ","
            << fmt(std::get<2>(key)) << "," << fmt(std::get<3>(key)) << "," << rows.size()
            << "," << fmt(mean_of(nsw)) << "," << fmt(ci95_halfwidth(nsw)) << ","
            << fmt(mean_of(util)) << "," << fmt(ci95_halfwidth(util)) << ","
            << fmt(mean_of(jain)) << "," << fmt(ci95_halfwidth(jain)) << ","
            << fmt(mean_of(df)) << "\n";
    }
}

namespace {

void write_heatmaps(const ExperimentResult& result, const ExperimentConfig& cfg) {
    const auto& grid = cfg.mu_factor_grid;
    auto value_of = [&](const ResultRow& r, const std::string& metric) {
        if (metric == "nsw")
            return r.nsw;
        if (metric == "util")
            return r.util;
        if (metric == "jain")
            return r.jain;
        const int idx = metric[3] - '1';
        return r.returns[idx];
    };
    std::vector<std::string> metrics = {"ret1", "ret2", "ret3", "nsw", "util", "jain"};
    for (const auto& metric : metrics) {
        std::ofstream out(cfg.out_dir + "/heatmap_" + metric + ".csv");
        out << "mu2_factor";
        for (double f3 : grid)
            out << "," << fmt(f3);
        out << "\n";
        for (double f2 : grid) {
            out << fmt(f2);
            for (double f3 : grid) {
                double v = std::nan("");
                for (const auto& r : result.rows)
                    if (r.mu_factor_2 == f2 && r.mu_factor_3 == f3)
                        v = value_of(r, metric);
                out << "," << fmt(v);
            }
            out << "\n";
        }
    }
}

void write_metadata(const ExperimentResult& result, const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["ci_method"] = "normal approximation, mean +/- 1.96 sd / sqrt(n)";
    j["failures"] = result.failures;
    std::ofstream out(cfg.out_dir + "/metadata.json");
    out << j.dump(2) << "\n";
}

} // namespace

int run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
    std::filesystem::create_directories(cfg.out_dir);
    {
        std::ofstream echo(cfg.out_dir + "/config-echo.json");
        echo << config_to_json(cfg) << "\n";
    }

    if (cfg.experiment == "counterexample")
        return cmd_counterexample(log);

    ExperimentResult result;
    if (cfg.experiment == "four-room") {
        ExperimentResult eight;
        result = cmd_four_room(cfg, &eight);
        write_results_csv(eight, cfg.out_dir + "/results_8obj.csv");
    } else if (cfg.experiment == "random-sweep") {
        result = cmd_random_sweep(cfg);
        write_aggregate_csv(result, cfg.out_dir + "/aggregate.csv");
    } else if (cfg.experiment == "perturb-mu") {
        result = cmd_perturb_mu(cfg);
        write_aggregate_csv(result, cfg.out_dir + "/aggregate.csv");
    } else if (cfg.experiment == "perturb-grid") {
        result = cmd_perturb_grid(cfg);
        write_heatmaps(result, cfg);
    } else {
        throw std::invalid_argument("unknown experiment: " + cfg.experiment);
    }

    write_results_csv(result, cfg.out_dir + "/results.csv");
    write_metadata(result, cfg);
    log << cfg.experiment << ": " << result.rows.size() << " rows";
    if (!result.failures.empty())
        log << ", " << result.failures.size() << " notes/failures";
    log << "\n";
    for (const auto& f : result.failures)
        log << "  " << f << "\n";
    return 0;
}

} // namespace fairdice

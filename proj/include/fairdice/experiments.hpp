#pragma once

#include "fairdice/environments.hpp"
#include "fairdice/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace fairdice {

/// Configuration shared by the experiment commands. Fields not used by a
/// given experiment are ignored; default_config() fills the per-experiment
/// defaults, and config_from_json overrides fields present in the file.
struct ExperimentConfig {
    std::string experiment;
    std::string out_dir = ".";
    std::vector<std::uint64_t> seeds;
    std::vector<double> alpha_grid;
    std::vector<double> beta_grid;
    std::vector<double> sigma_grid;
    std::vector<double> mu_factor_grid;

    double alpha = 1.0;
    double beta = 0.01;
    std::string divergence = "chi2";
    std::string e_mode = "exact_model";
    int n_trajectories = 0; // 0 = experiment default
    int horizon = 0;        // 0 = experiment default
    double gamma_four_room = 0.8;
    double slip = 0.1;
    double behavior_optimality = 0.5;
    double clamp_eps = 1e-6;
    double mu_clamp = 1e-4; // floor for perturbed weights
    bool normalized_returns = false; // four-room reports plain discounted sums
    bool save_solutions = false;
    int threads = 0; // 0 = hardware concurrency
};

ExperimentConfig default_config(const std::string& experiment);
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);

struct ResultRow {
    std::string experiment; // experiment name, optionally "/variant"
    std::uint64_t seed = 0;
    double alpha = 0.0;
    double beta = 0.0;
    double sigma = 0.0;
    std::vector<double> returns;
    double nsw = 0.0;
    double util = 0.0;
    double jain = 0.0;
    double df = 0.0;
    long iters = 0;
    bool converged = true;
    double mu_factor_2 = 1.0; // perturb-grid coordinates
    double mu_factor_3 = 1.0;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
    int n_objectives = 0;
    std::vector<std::string> failures;
};

/// Runs the worked single-state examples end to end (primal oracle and
/// dual solver) and checks their known optima. Prints one pass/fail line
/// per assertion to `log`; returns the number of failed assertions.
int cmd_counterexample(std::ostream& log);

/// Builds the four-room benchmark, collects uniform-policy data and
/// compares behavior / fixed-utilitarian / welfare-maximizing policies;
/// also runs the eight-objective variant (returned separately since its
/// rows carry eight returns).
ExperimentResult cmd_four_room(const ExperimentConfig& cfg,
                               ExperimentResult* eight_objectives = nullptr);

/// Per seed: fresh random MOMDP, mixture behavior policy, offline data,
/// then one solve per (alpha, beta) grid point, each evaluated exactly.
/// Also emits per-seed rows for the behavior policy and for the policy
/// implied by the dataset itself (the beta -> infinity limit).
ExperimentResult cmd_random_sweep(const ExperimentConfig& cfg);

/// Per seed: solve for mu*, then re-solve with frozen weights
/// mu* (1 + noise) for each noise scale sigma and evaluate.
ExperimentResult cmd_perturb_mu(const ExperimentConfig& cfg);

/// Four-room: solve for mu*, then sweep multiplicative offsets of
/// (mu_2, mu_3) around mu* with mu_1 fixed, re-solving with frozen
/// weights per grid point.
ExperimentResult cmd_perturb_grid(const ExperimentConfig& cfg);

void write_results_csv(const ExperimentResult& result, const std::string& path);

/// Per-(alpha, beta) or per-sigma means with normal-approximation 95%
/// confidence intervals.
void write_aggregate_csv(const ExperimentResult& result, const std::string& path);

/// Dispatches on cfg.experiment, writes results.csv, aggregate/heatmap
/// files where applicable, and config-echo.json under cfg.out_dir.
/// Returns a process exit code (nonzero on counterexample failures).
int run_experiment(const ExperimentConfig& cfg, std::ostream& log);

} // namespace fairdice

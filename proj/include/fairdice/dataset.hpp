#pragma once

#include "fairdice/momdp.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fairdice {

struct Step {
    int state = 0;
    int action = 0;
    std::vector<double> reward;
    int next_state = 0;
    bool done = false;
};

struct Trajectory {
    std::vector<Step> steps;
};

struct OfflineDataset {
    std::vector<Trajectory> trajectories;
    std::string env_fingerprint;
    int horizon = 0;
    std::uint64_t seed = 0;
};

enum class Weighting { discounted, uniform };

/// One dataset transition with its weight in the empirical distribution
/// (gamma^t before normalization in discounted mode).
struct WeightedTransition {
    int state = 0;
    int action = 0;
    int next_state = 0;
    double weight = 0.0;
};

/// Empirical quantities derived from an offline dataset.
struct EmpiricalEstimates {
    Occupancy d_D;                  // empirical state-action distribution, sums to 1
    std::vector<double> p0_hat;     // start-state frequencies
    std::vector<std::vector<std::vector<double>>> t_hat; // MLE transitions
    std::vector<std::vector<int>> visit_counts;          // per (s,a)
    std::vector<std::vector<bool>> unvisited;            // flagged (s,a) rows
    std::vector<WeightedTransition> samples;             // for sample-based losses
    double gamma = 0.0;
};

TabularPolicy uniform_policy(const MOMDP& m);

/// Deterministic greedy policy from value iteration on the scalarized
/// reward sum_i weights[i] r_i(s,a). Ties resolve to the lowest action
/// index. Throws if the Bellman residual does not reach 1e-10 within the
/// iteration cap.
TabularPolicy optimal_scalar_policy(const MOMDP& m, const std::vector<double>& weights);

/// Per-state mixture pi_z = z pi* + (1-z) pi_unif with z chosen by
/// bisection so that the normalized scalar performance
/// (J_z - J_unif) / (J* - J_unif) hits `target` within 1e-4. Returns the
/// uniform policy when the optimal and uniform policies already perform
/// identically.
TabularPolicy mixture_policy_for_optimality(const MOMDP& m, double target,
                                            const std::vector<double>& weights);

/// Samples n episodes from p0 under pi, truncated at the horizon or upon
/// entering an absorbing zero-reward state. Each trajectory draws from an
/// independent stream derived from (seed, index), so the result does not
/// depend on sampling order.
OfflineDataset sample_trajectories(const MOMDP& m, const TabularPolicy& pi, int n,
                                   int horizon, std::uint64_t seed);

/// Computes d_D, p0_hat and MLE transitions.
///
/// In discounted mode each observed step carries weight gamma^t and every
/// terminated trajectory additionally contributes the analytic tail
/// gamma^T / (1-gamma) of its absorbing state (spread uniformly over
/// actions), so that d_D converges to the behavior occupancy even on
/// episodic environments. Unvisited (s,a) rows of t_hat are flagged and
/// defaulted to a self-loop.
EmpiricalEstimates empirical_estimates(const OfflineDataset& ds, const MOMDP& m,
                                       Weighting weighting = Weighting::discounted);

/// Packages an exactly-known data distribution (e.g. a behavior policy's
/// occupancy) in the same form, with t_hat equal to the true transitions.
EmpiricalEstimates exact_estimates(const MOMDP& m, const Occupancy& d_data);

void save_dataset(const OfflineDataset& ds, const std::string& path);
OfflineDataset load_dataset(const std::string& path);

/// Warns (returns messages) if the dataset does not match the environment
/// fingerprint or contains out-of-range indices.
std::vector<std::string> check_dataset_against_env(const OfflineDataset& ds, const MOMDP& m);

} // namespace fairdice

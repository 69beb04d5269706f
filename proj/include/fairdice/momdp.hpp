#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fairdice {

/// Finite multi-objective MDP with a vector-valued reward. Transition and
/// reward tables are stored densely and indexed by (state, action).
struct MOMDP {
    int n_states = 0;
    int n_actions = 0;
    int n_objectives = 0;
    double gamma = 0.0;
    /// transition[s][a][s'] = T(s'|s,a)
    std::vector<std::vector<std::vector<double>>> transition;
    /// reward[s][a][i] = r_i(s,a)
    std::vector<std::vector<std::vector<double>>> reward;
    std::vector<double> p0;

    /// Allocates zeroed tables of the given shape.
    static MOMDP zeros(int n_states, int n_actions, int n_objectives, double gamma);
};

/// Row-stochastic policy table pi[s][a].
struct TabularPolicy {
    std::vector<std::vector<double>> probs;

    static TabularPolicy uniform(int n_states, int n_actions);
    int n_states() const { return static_cast<int>(probs.size()); }
    int n_actions() const { return probs.empty() ? 0 : static_cast<int>(probs[0].size()); }
};

/// Discounted state-action visitation mass d[s][a] (sums to 1 for a valid
/// stationary distribution under the (1-gamma) p0 normalization).
struct Occupancy {
    std::vector<std::vector<double>> d;

    static Occupancy zeros(int n_states, int n_actions);
    double total_mass() const;
    int n_states() const { return static_cast<int>(d.size()); }
    int n_actions() const { return d.empty() ? 0 : static_cast<int>(d[0].size()); }
};

/// Checks shape consistency, row-stochasticity of T and p0, nonnegativity
/// and finiteness. Returns one human-readable line per violation; an empty
/// report means the model is valid.
std::vector<std::string> validate_momdp(const MOMDP& m);

/// Returns a copy of `m` extended with one absorbing sink state. Every
/// action taken in a terminal state or in the sink moves to the sink with
/// probability 1 and zero reward; all other dynamics are unchanged.
MOMDP augment_absorbing(const MOMDP& m, const std::vector<int>& terminal_states);

/// Solves the Bellman flow equations for the stationary distribution of
/// `pi` by a dense linear solve on the state marginals:
///   rho = (I - gamma P_pi^T)^{-1} (1-gamma) p0,  d(s,a) = pi(a|s) rho(s).
/// Throws std::runtime_error if the system is singular (malformed MOMDP).
Occupancy policy_occupancy(const MOMDP& m, const TabularPolicy& pi);

/// J_i = sum_{s,a} d(s,a) r_i(s,a) for each objective i.
std::vector<double> occupancy_returns(const MOMDP& m, const Occupancy& d);

/// Bellman flow residual per state:
///   F_d(s) = (1-gamma) p0(s) + gamma sum_{sb,ab} T(s|sb,ab) d(sb,ab) - sum_a d(s,a).
std::vector<double> bellman_flow_residual(const MOMDP& m, const Occupancy& d);

/// Normalizes rows of `d` into a policy. States whose marginal mass is at
/// or below `mass_eps` copy the fallback row instead (the ratio is
/// undefined there).
TabularPolicy policy_from_occupancy(const Occupancy& d, const TabularPolicy& fallback,
                                    double mass_eps = 1e-12);

/// Canonical JSON form (fields: n_states, n_actions, n_objectives, gamma,
/// p0, transition, reward).
std::string momdp_to_json(const MOMDP& m);
MOMDP momdp_from_json(const std::string& text);
void save_momdp(const MOMDP& m, const std::string& path);
MOMDP load_momdp(const std::string& path);

/// FNV-1a hash of the canonical JSON form, as fixed-width hex. Used to tie
/// datasets to the environment that generated them.
std::string momdp_fingerprint(const MOMDP& m);

} // namespace fairdice

#pragma once

#include "fairdice/dataset.hpp"
#include "fairdice/momdp.hpp"
#include "fairdice/scalarization.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fairdice {

/// Where the advantage's transition expectation comes from: the true
/// model, the MLE model estimated from data, or per-transition samples.
enum class EMode { exact_model, mle_model, sampled };

EMode e_mode_from_string(const std::string& tag);
std::string to_string(EMode mode);

struct SolverConfig {
    double beta = 0.01;
    double alpha = 1.0;
    Divergence divergence = Divergence::chi2;
    double learning_rate = 0.1; // initial trial step of the line search
    long max_iters = 200000;
    double grad_tol = 1e-8; // max-norm over the nu and mu gradient blocks
    EMode e_mode = EMode::exact_model;
    std::uint64_t seed = 0;
    /// Plain fixed-step descent (step = learning_rate) instead of the
    /// default quasi-Newton descent with a backtracking line search.
    bool fixed_step = false;
};

struct SolveDiagnostics {
    double final_loss = 0.0;
    double grad_norm_nu = 0.0;
    double grad_norm_mu = 0.0;
    long iterations = 0;
    bool converged = false;
    /// Set when alpha = 0 routed the solve to fixed utilitarian weights.
    bool utilitarian_fixed = false;
    std::vector<std::string> warnings;
};

/// Solution of the dual problem: potentials, implicit weights, importance
/// weights, the corrected occupancy and the extracted policy.
struct DualSolution {
    std::vector<double> nu;
    std::vector<double> mu;
    std::vector<std::vector<double>> w; // max(0, (f')^{-1}(e/beta)) entrywise
    Occupancy d_star;                   // w * d_D
    std::vector<double> k_star;         // (u')^{-1}(mu_i); empty for solve_fixed
    TabularPolicy policy;
    SolveDiagnostics diagnostics;
};

/// e(s,a) = sum_i mu_i r_i(s,a) + gamma sum_s' T(s'|s,a) nu(s') - nu(s),
/// with T from the true model or the MLE estimate depending on the mode.
std::vector<std::vector<double>> advantage(const std::vector<double>& nu,
                                           const std::vector<double>& mu, const MOMDP& m,
                                           const EmpiricalEstimates& est, EMode mode);

/// The dual objective
///   E_{p0}[(1-gamma) nu] + E_{d_D}[beta f*_0(e/beta)] + sum_i u*_i(-mu_i).
double dual_loss(const std::vector<double>& nu, const std::vector<double>& mu,
                 const SolverConfig& cfg, const MOMDP& m, const EmpiricalEstimates& est);

/// Analytic gradients: grad_nu equals the Bellman flow residual of
/// d = w d_D, and grad_mu_i = sum d r_i - (u')^{-1}(mu_i).
std::pair<std::vector<double>, std::vector<double>>
dual_gradients(const std::vector<double>& nu, const std::vector<double>& mu,
               const SolverConfig& cfg, const MOMDP& m, const EmpiricalEstimates& est);

/// Minimizes the dual loss jointly over (nu, log mu) and recovers the
/// corrected occupancy and policy. alpha = 0 has a constant marginal
/// utility, so it is served by solve_fixed with unit weights and flagged
/// in the diagnostics. Deterministic given identical inputs.
DualSolution solve(const SolverConfig& cfg, const MOMDP& m, const EmpiricalEstimates& est);

/// Same machinery with mu frozen (the regularized linear-scalarization
/// special case); the conjugate utility term drops and k_star is omitted.
DualSolution solve_fixed(const SolverConfig& cfg, const std::vector<double>& mu_fixed,
                         const MOMDP& m, const EmpiricalEstimates& est);

/// D_f(d || d_D) = sum d_D f(d/d_D) with 0 f(0/0) = 0; +inf if d places
/// mass outside the support of d_D.
double f_divergence(const Occupancy& d, const Occupancy& d_D, Divergence family);

std::string solution_to_json(const DualSolution& sol, const SolverConfig& cfg);
DualSolution solution_from_json(const std::string& text);

} // namespace fairdice

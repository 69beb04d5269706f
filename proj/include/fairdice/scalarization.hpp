#pragma once

#include <string>
#include <vector>

namespace fairdice {

enum class Divergence { chi2, soft_chi2 };

Divergence divergence_from_string(const std::string& tag);
std::string to_string(Divergence family);

/// f(x) for x >= 0.
///   chi2:      0.5 (x-1)^2
///   soft_chi2: x log x - x + 1 for x < 1, 0.5 (x-1)^2 otherwise
double f_eval(Divergence family, double x);

/// f'(x).
double f_prime(Divergence family, double x);

/// (f')^{-1}(y).
double f_prime_inv(Divergence family, double y);

/// Nonnegatively-constrained convex conjugate f*_0(y) = max_{x>=0} xy - f(x).
double f_conj0(Divergence family, double y);

/// Derivative of f*_0, which equals the optimal importance weight:
/// (f*_0)'(y) = max(0, (f')^{-1}(y)).
double f_conj0_prime(Divergence family, double y);

/// Alpha-fairness utility family on x > 0:
///   u(x) = x^{1-alpha} / (1-alpha) for alpha != 1, log(x) for alpha = 1.
/// alpha = 0 is the linear (utilitarian) limit: u' is constant there, so
/// u_prime_inv and u_conj are undefined and throw.
struct AlphaFairness {
    double alpha = 1.0;

    explicit AlphaFairness(double alpha);

    double u(double x) const;
    double u_prime(double x) const;          // x^{-alpha}
    double u_prime_inv(double mu) const;     // mu^{-1/alpha}, requires alpha > 0, mu > 0
    /// Convex conjugate u*(y) = max_x xy + u(x), finite only for y < 0.
    /// For y = -mu: alpha = 1 gives -1 - log(mu); otherwise
    /// (alpha / (1-alpha)) mu^{(alpha-1)/alpha}.
    double u_conj(double y) const;
};

struct WelfareMetrics {
    double nsw = 0.0;
    double utilitarian = 0.0;
    double jain = 0.0;
};

/// NSW is computed on returns clamped below at clamp_eps, Jain on the same
/// clamped returns, utilitarian on the raw returns.
WelfareMetrics welfare_metrics(const std::vector<double>& returns, double clamp_eps = 1e-6);

} // namespace fairdice

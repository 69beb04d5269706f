#include "fairdice/scalarization.hpp"

#include <cmath>
#include <stdexcept>

namespace fairdice {

Divergence divergence_from_string(const std::string& tag) {
    if (tag == "chi2")
        return Divergence::chi2;
    if (tag == "soft_chi2")
        return Divergence::soft_chi2;
    throw std::invalid_argument("unknown divergence tag: " + tag);
}

std::string to_string(Divergence family) {
    return family == Divergence::chi2 ? "chi2" : "soft_chi2";
}

double f_eval(Divergence family, double x) {
    if (x < 0.0)
        throw std::domain_error("f is defined on x >= 0");
    switch (family) {
    case Divergence::chi2:
        return 0.5 * (x - 1.0) * (x - 1.0);
    case Divergence::soft_chi2:
        if (x < 1.0)
            return x <= 0.0 ? 1.0 : x * std::log(x) - x + 1.0;
        return 0.5 * (x - 1.0) * (x - 1.0);
    }
    return 0.0;
}

double f_prime(Divergence family, double x) {
    switch (family) {
    case Divergence::chi2:
        return x - 1.0;
    case Divergence::soft_chi2:
        if (x < 1.0) {
            if (x <= 0.0)
                throw std::domain_error("soft_chi2 derivative requires x > 0");
            return std::log(x);
        }
        return x - 1.0;
    }
    return 0.0;
}

double f_prime_inv(Divergence family, double y) {
    switch (family) {
    case Divergence::chi2:
        return y + 1.0;
    case Divergence::soft_chi2:
        return y < 0.0 ? std::exp(y) : y + 1.0;
    }
    return 0.0;
}

double f_conj0(Divergence family, double y) {
    switch (family) {
    case Divergence::chi2:
        return y >= -1.0 ? 0.5 * y * y + y : -0.5;
    case Divergence::soft_chi2:
        return y < 0.0 ? std::expm1(y) : 0.5 * y * y + y;
    }
    return 0.0;
}

double f_conj0_prime(Divergence family, double y) {
    return std::max(0.0, f_prime_inv(family, y));
}

AlphaFairness::AlphaFairness(double alpha_in) : alpha(alpha_in) {
    if (alpha < 0.0)
        throw std::invalid_argument("alpha must be >= 0");
}

double AlphaFairness::u(double x) const {
    if (x <= 0.0)
        throw std::domain_error("alpha-fairness utility requires x > 0");
    if (alpha == 1.0)
        return std::log(x);
    return std::pow(x, 1.0 - alpha) / (1.0 - alpha);
}

double AlphaFairness::u_prime(double x) const {
    if (x <= 0.0)
        throw std::domain_error("alpha-fairness utility requires x > 0");
    return std::pow(x, -alpha);
}

double AlphaFairness::u_prime_inv(double mu) const {
    if (alpha == 0.0)
        throw std::domain_error("u' is constant for alpha = 0; inverse undefined");
    if (mu <= 0.0)
        throw std::domain_error("u_prime_inv requires mu > 0 (iterate left the dual domain)");
    return std::pow(mu, -1.0 / alpha);
}

double AlphaFairness::u_conj(double y) const {
    if (y >= 0.0)
        throw std::domain_error("u is increasing, so u*(y) is finite only for y < 0");
    if (alpha == 0.0)
        throw std::domain_error("u*(y) is degenerate for alpha = 0");
    const double mu = -y;
    if (alpha == 1.0)
        return -1.0 - std::log(mu);
    return alpha / (1.0 - alpha) * std::pow(mu, (alpha - 1.0) / alpha);
}

WelfareMetrics welfare_metrics(const std::vector<double>& returns, double clamp_eps) {
    if (returns.empty())
        throw std::invalid_argument("welfare_metrics requires at least one return");
    if (clamp_eps <= 0.0)
        throw std::invalid_argument("clamp_eps must be positive");

    WelfareMetrics out;
    double clamped_sum = 0.0;
    double clamped_sq = 0.0;
    for (double r : returns) {
        out.utilitarian += r;
        const double c = std::max(r, clamp_eps);
        out.nsw += std::log(c);
        clamped_sum += c;
        clamped_sq += c * c;
    }
    const double n = static_cast<double>(returns.size());
    out.jain = clamped_sum * clamped_sum / (n * clamped_sq);
    return out;
}

} // namespace fairdice

#include "fairdice/scalarization.hpp"
#include "fairdice/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace fairdice;

namespace {

/// Grid-maximization oracle for f*_0(y) = max_{x>=0} xy - f(x): coarse
/// scan then local refinement.
double f_conj0_by_grid(Divergence fam, double y) {
    double best = -f_eval(fam, 0.0), arg = 0.0;
    for (double x = 0.0; x <= 40.0; x += 1e-2) {
        const double v = x * y - f_eval(fam, x);
        if (v > best) {
            best = v;
            arg = x;
        }
    }
    for (double x = std::max(0.0, arg - 2e-2); x <= arg + 2e-2; x += 1e-6) {
        const double v = x * y - f_eval(fam, x);
        best = std::max(best, v);
    }
    return best;
}

/// Grid-maximization oracle for u*(y) = max_{x>0} xy + u(x), log-spaced.
double u_conj_by_grid(const AlphaFairness& u, double y) {
    double best = -1e300, arg = 1.0;
    for (double x = 1e-5; x <= 1e5; x *= 1.0 + 1e-4) {
        const double v = x * y + u.u(x);
        if (v > best) {
            best = v;
            arg = x;
        }
    }
    for (double x = arg * 0.999; x <= arg * 1.001; x += arg * 1e-7)
        best = std::max(best, x * y + u.u(x));
    return best;
}

} // namespace

TEST_CASE("chi2 closed forms") {
    CHECK(f_eval(Divergence::chi2, 1.0) == 0.0);
    CHECK(f_conj0(Divergence::chi2, 0.0) == doctest::Approx(0.0));
    CHECK(f_conj0(Divergence::chi2, 1.0) == doctest::Approx(1.5));
    CHECK(f_conj0(Divergence::chi2, -2.0) == doctest::Approx(-0.5));
    CHECK(f_prime_inv(Divergence::chi2, 0.25) == doctest::Approx(1.25));
    CHECK_THROWS_AS(f_eval(Divergence::chi2, -0.1), std::domain_error);
}

TEST_CASE("soft_chi2 closed forms") {
    CHECK(f_eval(Divergence::soft_chi2, 1.0) == 0.0);
    CHECK(f_eval(Divergence::soft_chi2, 0.0) == doctest::Approx(1.0));
    CHECK(f_conj0(Divergence::soft_chi2, -1.0) == doctest::Approx(std::exp(-1.0) - 1.0));
    CHECK(f_prime_inv(Divergence::soft_chi2, 0.0) == doctest::Approx(1.0));
    // branch continuity at x = 1 / y = 0
    CHECK(f_prime(Divergence::soft_chi2, 1.0 - 1e-12) ==
          doctest::Approx(f_prime(Divergence::soft_chi2, 1.0)).epsilon(1e-9));
    CHECK(f_conj0(Divergence::soft_chi2, -1e-12) ==
          doctest::Approx(f_conj0(Divergence::soft_chi2, 1e-12)).epsilon(1e-9));
}

TEST_CASE("conjugates match the grid-maximization oracle") {
    for (const auto fam : {Divergence::chi2, Divergence::soft_chi2}) {
        for (double y = -10.0; y <= 10.0; y += 0.37) {
            CHECK(f_conj0(fam, y) ==
                  doctest::Approx(f_conj0_by_grid(fam, y)).epsilon(1e-6));
        }
    }
}

TEST_CASE("derivative inverse round trips on a grid") {
    for (const auto fam : {Divergence::chi2, Divergence::soft_chi2}) {
        for (double x = 0.05; x <= 20.0; x += 0.31) {
            CHECK(f_prime_inv(fam, f_prime(fam, x)) == doctest::Approx(x).epsilon(1e-9));
        }
    }
}

TEST_CASE("Fenchel-Young inequality with equality at the maximizer") {
    for (const auto fam : {Divergence::chi2, Divergence::soft_chi2}) {
        for (double y = -5.0; y <= 5.0; y += 0.41) {
            for (double x = 0.0; x <= 10.0; x += 0.23)
                CHECK(f_conj0(fam, y) + f_eval(fam, x) >= x * y - 1e-12);
            const double xstar = std::max(0.0, f_prime_inv(fam, y));
            CHECK(f_conj0(fam, y) + f_eval(fam, xstar) ==
                  doctest::Approx(xstar * y).epsilon(1e-8));
        }
    }
}

TEST_CASE("conjugate derivative equals the clamped inverse derivative") {
    const double h = 1e-5;
    for (const auto fam : {Divergence::chi2, Divergence::soft_chi2}) {
        for (double y = -4.0; y <= 4.0; y += 0.37) {
            if (fam == Divergence::chi2 && std::abs(y + 1.0) < 0.05)
                continue; // kink
            const double numeric = (f_conj0(fam, y + h) - f_conj0(fam, y - h)) / (2 * h);
            CHECK(numeric == doctest::Approx(f_conj0_prime(fam, y)).epsilon(1e-5));
        }
    }
}

TEST_CASE("alpha-fairness closed forms") {
    const AlphaFairness nsw(1.0);
    CHECK(nsw.u(1.0) == 0.0);
    CHECK(nsw.u_prime_inv(0.5) == doctest::Approx(2.0));
    CHECK(nsw.u_conj(-1.0) == doctest::Approx(-1.0));

    const AlphaFairness half(0.5);
    CHECK(half.u_prime_inv(2.0) == doctest::Approx(0.25));
    CHECK(half.u_conj(-2.0) == doctest::Approx(0.5));

    CHECK_THROWS_AS(nsw.u_conj(0.5), std::domain_error);
    CHECK_THROWS_AS(nsw.u_prime_inv(-1.0), std::domain_error);
    CHECK_THROWS_AS(AlphaFairness(-0.5), std::invalid_argument);
    CHECK_THROWS_AS(AlphaFairness(0.0).u_prime_inv(1.0), std::domain_error);
}

TEST_CASE("u conjugate and inverse match grid oracles") {
    for (double alpha : {0.5, 1.0, 1.25}) {
        const AlphaFairness u(alpha);
        for (double mu = 0.05; mu <= 20.0; mu *= 1.7) {
            CHECK(u.u_conj(-mu) == doctest::Approx(u_conj_by_grid(u, -mu)).epsilon(1e-6));
            CHECK(u.u_prime_inv(u.u_prime(mu)) == doctest::Approx(mu).epsilon(1e-9));
        }
    }
}

TEST_CASE("u conjugate derivative identity") {
    const double h = 1e-5;
    for (double alpha : {0.5, 1.0, 1.25}) {
        const AlphaFairness u(alpha);
        for (double mu = 0.05; mu <= 20.0; mu *= 1.9) {
            const double numeric = (u.u_conj(-(mu + h)) - u.u_conj(-(mu - h))) / (2 * h);
            CHECK(numeric == doctest::Approx(-u.u_prime_inv(mu)).epsilon(1e-5));
        }
    }
}

TEST_CASE("small alpha approaches the linear utility") {
    const AlphaFairness u(1e-3);
    for (double x = 0.1; x <= 10.0; x *= 1.45) {
        CHECK(u.u(x) == doctest::Approx(std::pow(x, 1.0 - 1e-3) / (1.0 - 1e-3)));
    }
    CHECK(std::abs(u.u_prime_inv(1.0) - 1.0) < 1e-9);
}

TEST_CASE("welfare metrics: worked values and bounds") {
    const auto equal = welfare_metrics({1.0, 1.0, 1.0});
    CHECK(equal.nsw == doctest::Approx(0.0));
    CHECK(equal.utilitarian == doctest::Approx(3.0));
    CHECK(equal.jain == doctest::Approx(1.0));

    const auto onehot = welfare_metrics({1.0, 0.0, 0.0}, 1e-6);
    CHECK(onehot.utilitarian == doctest::Approx(1.0));
    CHECK(onehot.nsw == doctest::Approx(2.0 * std::log(1e-6)));
    CHECK(onehot.jain == doctest::Approx(1.0 / 3.0).epsilon(1e-4));

    const auto pair = welfare_metrics({3.0, 1.0});
    CHECK(pair.jain == doctest::Approx(0.8));

    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_int(6));
        std::vector<double> r(n);
        for (auto& x : r)
            x = 1e-3 + rng.uniform();
        const auto m = welfare_metrics(r);
        CHECK(m.jain >= 1.0 / n - 1e-12);
        CHECK(m.jain <= 1.0 + 1e-12);
    }
}

#include "fairdice/momdp.hpp"
#include "fairdice/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <filesystem>
#include <fstream>

using namespace fairdice;

namespace {

/// 2-state deterministic chain: s0 -> s1, s1 absorbing. One action.
MOMDP chain2(double gamma) {
    MOMDP m = MOMDP::zeros(2, 1, 1, gamma);
    m.transition[0][0][1] = 1.0;
    m.transition[1][0][1] = 1.0;
    m.reward[0][0][0] = 1.0;
    m.p0[0] = 1.0;
    return m;
}

MOMDP random_momdp(Rng& rng, int S, int A, int I, double gamma) {
    MOMDP m = MOMDP::zeros(S, A, I, gamma);
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            auto row = rng.dirichlet_unit(S);
            m.transition[s][a] = row;
            for (int i = 0; i < I; ++i)
                m.reward[s][a][i] = rng.uniform();
        }
    }
    m.p0 = rng.dirichlet_unit(S);
    return m;
}

TabularPolicy random_policy(Rng& rng, int S, int A) {
    TabularPolicy pi;
    for (int s = 0; s < S; ++s)
        pi.probs.push_back(rng.dirichlet_unit(A));
    return pi;
}

/// Independent occupancy oracle: power iteration on the flow map.
Occupancy occupancy_by_power_iteration(const MOMDP& m, const TabularPolicy& pi,
                                       int iters = 4000) {
    std::vector<double> rho(m.n_states, 0.0);
    for (int it = 0; it < iters; ++it) {
        std::vector<double> next(m.n_states, 0.0);
        for (int s = 0; s < m.n_states; ++s)
            next[s] = (1.0 - m.gamma) * m.p0[s];
        for (int s = 0; s < m.n_states; ++s)
            for (int a = 0; a < m.n_actions; ++a)
                for (int sp = 0; sp < m.n_states; ++sp)
                    next[sp] += m.gamma * pi.probs[s][a] * m.transition[s][a][sp] * rho[s];
        rho = next;
    }
    Occupancy d = Occupancy::zeros(m.n_states, m.n_actions);
    for (int s = 0; s < m.n_states; ++s)
        for (int a = 0; a < m.n_actions; ++a)
            d.d[s][a] = pi.probs[s][a] * rho[s];
    return d;
}

} // namespace

TEST_CASE("validate_momdp accepts a well-formed model and names violations") {
    MOMDP m = chain2(0.9);
    CHECK(validate_momdp(m).empty());

    MOMDP bad_row = m;
    bad_row.transition[0][0][1] = 0.9; // sums to 0.9
    const auto report1 = validate_momdp(bad_row);
    REQUIRE(!report1.empty());
    CHECK(report1[0].find("T[0][0]") != std::string::npos);

    MOMDP bad_reward = m;
    bad_reward.reward[1][0][0] = std::nan("");
    const auto report2 = validate_momdp(bad_reward);
    REQUIRE(!report2.empty());
    CHECK(report2[0].find("r[1][0]") != std::string::npos);

    MOMDP bad_gamma = m;
    bad_gamma.gamma = 1.0;
    CHECK(!validate_momdp(bad_gamma).empty());
}

TEST_CASE("augment_absorbing adds a sink and leaves other dynamics unchanged") {
    MOMDP m = chain2(0.9);

    SUBCASE("no terminal states: unreachable sink") {
        const MOMDP out = augment_absorbing(m, {});
        CHECK(out.n_states == 3);
        CHECK(validate_momdp(out).empty());
        CHECK(out.transition[0][0][1] == 1.0);
        CHECK(out.transition[2][0][2] == 1.0);
    }

    SUBCASE("single terminal state becomes a chain into the sink") {
        MOMDP one = MOMDP::zeros(1, 1, 1, 0.5);
        one.transition[0][0][0] = 1.0;
        one.p0[0] = 1.0;
        const MOMDP out = augment_absorbing(one, {0});
        CHECK(out.n_states == 2);
        CHECK(out.transition[0][0][1] == 1.0);
        CHECK(out.transition[1][0][1] == 1.0);
        CHECK(validate_momdp(out).empty());
    }

    SUBCASE("out-of-range terminal index throws") {
        CHECK_THROWS_AS(augment_absorbing(m, {7}), std::invalid_argument);
    }
}

TEST_CASE("policy_occupancy: closed-form cases") {
    SUBCASE("single state, single action") {
        MOMDP m = MOMDP::zeros(1, 1, 1, 0.5);
        m.transition[0][0][0] = 1.0;
        m.p0[0] = 1.0;
        const auto d = policy_occupancy(m, TabularPolicy::uniform(1, 1));
        CHECK(d.d[0][0] == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("2-state chain at gamma = 0.5 splits mass (0.5, 0.5)") {
        const MOMDP m = chain2(0.5);
        const auto d = policy_occupancy(m, TabularPolicy::uniform(2, 1));
        CHECK(d.d[0][0] == doctest::Approx(0.5).epsilon(1e-10));
        CHECK(d.d[1][0] == doctest::Approx(0.5).epsilon(1e-10));

        // Cross-check against the power-iteration oracle.
        const auto ref = occupancy_by_power_iteration(m, TabularPolicy::uniform(2, 1));
        CHECK(d.d[0][0] == doctest::Approx(ref.d[0][0]).epsilon(1e-9));
        CHECK(d.d[1][0] == doctest::Approx(ref.d[1][0]).epsilon(1e-9));
    }
}

TEST_CASE("flow residual, mass and round trip on random models") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int S = 2 + static_cast<int>(rng.uniform_int(8));
        const int A = 1 + static_cast<int>(rng.uniform_int(3));
        const MOMDP m = random_momdp(rng, S, A, 2, 0.9);
        const TabularPolicy pi = random_policy(rng, S, A);
        const Occupancy d = policy_occupancy(m, pi);

        double residual = 0.0;
        for (double r : bellman_flow_residual(m, d))
            residual = std::max(residual, std::abs(r));
        CHECK(residual < 1e-8);
        CHECK(d.total_mass() == doctest::Approx(1.0).epsilon(1e-6));

        const TabularPolicy back = policy_from_occupancy(d, TabularPolicy::uniform(S, A));
        for (int s = 0; s < S; ++s) {
            double marginal = 0.0;
            for (int a = 0; a < A; ++a)
                marginal += d.d[s][a];
            if (marginal <= 1e-12)
                continue;
            for (int a = 0; a < A; ++a)
                CHECK(back.probs[s][a] == doctest::Approx(pi.probs[s][a]).epsilon(1e-6));
        }
    }
}

TEST_CASE("bellman_flow_residual matches the direct formula") {
    Rng rng(11);
    const MOMDP m = random_momdp(rng, 5, 2, 2, 0.8);

    SUBCASE("d = 0 gives (1-gamma) p0") {
        const auto res = bellman_flow_residual(m, Occupancy::zeros(5, 2));
        for (int s = 0; s < 5; ++s)
            CHECK(res[s] == doctest::Approx((1.0 - m.gamma) * m.p0[s]).epsilon(1e-14));
    }

    SUBCASE("arbitrary d evaluated against an inline re-computation") {
        Occupancy d = Occupancy::zeros(5, 2);
        for (auto& row : d.d)
            for (auto& x : row)
                x = 2.0 * rng.uniform(); // includes invalid occupancies
        const auto res = bellman_flow_residual(m, d);
        for (int s = 0; s < 5; ++s) {
            double expect = (1.0 - m.gamma) * m.p0[s];
            for (int sb = 0; sb < 5; ++sb)
                for (int ab = 0; ab < 2; ++ab)
                    expect += m.gamma * m.transition[sb][ab][s] * d.d[sb][ab];
            for (int a = 0; a < 2; ++a)
                expect -= d.d[s][a];
            CHECK(res[s] == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("occupancy_returns: zero, worked value and linearity") {
    SUBCASE("zero occupancy gives the zero vector") {
        MOMDP m = chain2(0.9);
        const auto j = occupancy_returns(m, Occupancy::zeros(2, 1));
        CHECK(j[0] == 0.0);
    }

    SUBCASE("two-action bandit returns (1.8332, 2.7500)") {
        MOMDP m = MOMDP::zeros(1, 2, 2, 0.0);
        m.transition[0][0][0] = m.transition[0][1][0] = 1.0;
        m.reward[0][0] = {1.0, 4.0};
        m.reward[0][1] = {3.0, 1.0};
        m.p0[0] = 1.0;
        Occupancy d = Occupancy::zeros(1, 2);
        d.d[0][0] = 0.5834;
        d.d[0][1] = 0.4166;
        const auto j = occupancy_returns(m, d);
        CHECK(j[0] == doctest::Approx(1.8332).epsilon(1e-10));
        CHECK(j[1] == doctest::Approx(2.7500).epsilon(1e-10));
    }

    SUBCASE("linearity and brute-force agreement") {
        Rng rng(3);
        const MOMDP m = random_momdp(rng, 6, 3, 2, 0.9);
        Occupancy d1 = Occupancy::zeros(6, 3), d2 = Occupancy::zeros(6, 3);
        for (int s = 0; s < 6; ++s)
            for (int a = 0; a < 3; ++a) {
                d1.d[s][a] = rng.uniform();
                d2.d[s][a] = rng.uniform();
            }
        const double alpha = 0.3, beta = 1.7;
        Occupancy mixed = Occupancy::zeros(6, 3);
        for (int s = 0; s < 6; ++s)
            for (int a = 0; a < 3; ++a)
                mixed.d[s][a] = alpha * d1.d[s][a] + beta * d2.d[s][a];

        const auto j1 = occupancy_returns(m, d1);
        const auto j2 = occupancy_returns(m, d2);
        const auto jm = occupancy_returns(m, mixed);
        for (int i = 0; i < 2; ++i) {
            CHECK(jm[i] == doctest::Approx(alpha * j1[i] + beta * j2[i]).epsilon(1e-12));
            // brute-force double loop
            double direct = 0.0;
            for (int s = 0; s < 6; ++s)
                for (int a = 0; a < 3; ++a)
                    direct += d1.d[s][a] * m.reward[s][a][i];
            CHECK(j1[i] == doctest::Approx(direct).epsilon(1e-14));
        }
    }
}

TEST_CASE("policy_from_occupancy normalizes rows and falls back on empty ones") {
    Occupancy d = Occupancy::zeros(2, 2);
    d.d[0][0] = 0.6609;
    d.d[0][1] = 0.3390;
    const TabularPolicy pi = policy_from_occupancy(d, TabularPolicy::uniform(2, 2));
    CHECK(pi.probs[0][0] == doctest::Approx(0.6609 / 0.9999).epsilon(1e-12));
    CHECK(pi.probs[0][1] == doctest::Approx(0.3390 / 0.9999).epsilon(1e-12));
    CHECK(pi.probs[1][0] == 0.5); // zero marginal -> uniform fallback
    CHECK(pi.probs[1][1] == 0.5);

    Occupancy det = Occupancy::zeros(2, 2);
    det.d[0][1] = 0.25;
    det.d[1][0] = 0.75;
    const TabularPolicy dpi = policy_from_occupancy(det, TabularPolicy::uniform(2, 2));
    CHECK(dpi.probs[0][1] == 1.0);
    CHECK(dpi.probs[1][0] == 1.0);
}

TEST_CASE("MOMDP JSON round trip and fingerprint stability") {
    Rng rng(19);
    const MOMDP m = random_momdp(rng, 4, 2, 3, 0.95);
    const std::string text = momdp_to_json(m);
    const MOMDP back = momdp_from_json(text);
    CHECK(momdp_to_json(back) == text);
    CHECK(momdp_fingerprint(back) == momdp_fingerprint(m));

    const auto path = std::filesystem::temp_directory_path() / "fd_momdp_test.json";
    save_momdp(m, path.string());
    const MOMDP loaded = load_momdp(path.string());
    CHECK(momdp_fingerprint(loaded) == momdp_fingerprint(m));
    std::filesystem::remove(path);

    MOMDP other = m;
    other.reward[0][0][0] += 1e-9;
    CHECK(momdp_fingerprint(other) != momdp_fingerprint(m));
}

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace fairdice {

/// Deterministic random source. The standard distributions are
/// implementation-defined, so all sampling here is built directly on
/// mt19937_64 output to keep results identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Derives an independent stream, e.g. one per trajectory, so that
    /// parallel sampling is schedule-independent.
    static Rng stream(std::uint64_t seed, std::uint64_t index) {
        return Rng(splitmix64(seed ^ splitmix64(index + 0x9e3779b97f4a7c15ULL)));
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n), n >= 1.
    std::uint64_t uniform_int(std::uint64_t n) {
        // Rejection sampling to avoid modulo bias.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    double exponential() { return -std::log1p(-uniform()); }

    double gaussian() {
        // Box-Muller; one draw per call keeps the stream layout simple.
        double u1 = uniform();
        while (u1 <= 0.0)
            u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    /// Index sampled from an unnormalized nonnegative weight vector.
    std::size_t categorical(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights)
            total += w;
        double u = uniform() * total;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            u -= weights[i];
            if (u < 0.0)
                return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

    /// Symmetric Dirichlet with unit concentration: exponentials, normalized.
    std::vector<double> dirichlet_unit(std::size_t k) {
        std::vector<double> x(k);
        double total = 0.0;
        for (auto& v : x) {
            v = exponential();
            total += v;
        }
        for (auto& v : x)
            v /= total;
        return x;
    }

    /// k distinct indices drawn uniformly from [0, n), order by first draw.
    std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t k) {
        std::vector<std::size_t> out;
        out.reserve(k);
        while (out.size() < k) {
            const std::size_t c = static_cast<std::size_t>(uniform_int(n));
            bool seen = false;
            for (std::size_t prev : out)
                seen = seen || prev == c;
            if (!seen)
                out.push_back(c);
        }
        return out;
    }

    static std::uint64_t splitmix64(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

private:
    std::mt19937_64 gen_;
};

} // namespace fairdice

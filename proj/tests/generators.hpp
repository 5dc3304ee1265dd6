#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace rotor::testing {

// Small seeded generators for property tests. Every test draws from its own
// fixed seed so failures are reproducible.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    long integer(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng_); }
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

    template <class T>
    const T& pick(const std::vector<T>& xs) {
        return xs[static_cast<std::size_t>(integer(0, static_cast<long>(xs.size()) - 1))];
    }

    /// p in [1, q-1] coprime to q (p = 1 when q = 1).
    long coprime(long q) {
        if (q == 1) return 1;
        for (;;) {
            long p = integer(1, q - 1);
            if (std::gcd(p, q) == 1) return p;
        }
    }

    /// Random composition of `total`: each of the total-1 gaps is a cut with
    /// probability 1/2.
    std::vector<int> composition(int total) {
        std::vector<int> parts;
        int run = 1;
        for (int l = 1; l < total; ++l) {
            if (integer(0, 1) == 1) {
                parts.push_back(run);
                run = 1;
            } else {
                ++run;
            }
        }
        parts.push_back(run);
        return parts;
    }

    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

inline const std::vector<long>& small_primes() {
    static const std::vector<long> ps{3, 5, 7, 11, 13};
    return ps;
}

} // namespace rotor::testing

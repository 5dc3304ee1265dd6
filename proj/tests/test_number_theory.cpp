#include <cmath>
#include <numbers>

#include "doctest.h"
#include "generators.hpp"
#include "rotor/errors.hpp"
#include "rotor/fit.hpp"
#include "rotor/number_theory.hpp"
#include "rotor/perturbation.hpp"
#include "rotor/resonance.hpp"

using namespace rotor;
using rotor::testing::Gen;
using std::numbers::pi;

namespace {

const std::vector<long>& primes_to_101() {
    static const std::vector<long> ps = [] {
        std::vector<long> out;
        for (long n = 2; n <= 101; ++n)
            if (is_prime(n)) out.push_back(n);
        return out;
    }();
    return ps;
}

long non_multiple(Gen& gen, long q, long lo, long hi) {
    for (;;) {
        const long x = gen.integer(lo, hi);
        if (x % q != 0) return x;
    }
}

} // namespace

TEST_SUITE("number_theory") {

TEST_CASE("primality") {
    CHECK_FALSE(is_prime(0));
    CHECK_FALSE(is_prime(1));
    CHECK(is_prime(2));
    CHECK(is_prime(101));
    CHECK_FALSE(is_prime(91));
    CHECK(is_prime(2147483647));
    CHECK(primes_to_101().size() == 26);
}

TEST_CASE("gauss sum cases") {
    const auto full = gauss_partial_sum(1, 7, 0.5, 7, 1, 4);
    CHECK(full.gauss_case == GaussCase::MultipleOfQ);
    CHECK(full.magnitude_squared == doctest::Approx(16.0).epsilon(1e-12));
    CHECK(full.bound == 16.0);
    CHECK(full.satisfied);

    const auto period = gauss_partial_sum(2, 5, 0.5, 3, 1, 5);
    CHECK(period.gauss_case == GaussCase::FullPeriod);
    CHECK(std::abs(period.magnitude_squared - 5.0) < 1e-10);
    CHECK(period.satisfied);

    // Reference: tests/oracles/oracle.py.
    const auto part = gauss_partial_sum(3, 11, 0.5, 2, 2, 6);
    CHECK(part.gauss_case == GaussCase::Partial);
    CHECK(part.magnitude_squared == doctest::Approx(12.661030454014695).epsilon(1e-12));
    CHECK(part.bound == doctest::Approx(2 * 11 * (1 + std::log(11.0))));
    CHECK(part.satisfied);
    CHECK(to_string(GaussCase::FullPeriod) == "full-period");
}

TEST_CASE("gauss sum preconditions") {
    CHECK_THROWS_AS(gauss_partial_sum(1, 9, 0.5, 1, 1, 3), InvalidInput);
    CHECK_THROWS_AS(gauss_partial_sum(7, 7, 0.5, 1, 1, 3), InvalidInput);
    CHECK_THROWS_AS(gauss_partial_sum(1, 7, 0.5, 1, 1, 8), InvalidInput);
    CHECK_THROWS_AS(gauss_partial_sum(1, 7, 0.5, 1, 1, 0), InvalidInput);
}

TEST_CASE("property: full period sums have magnitude q") {
    Gen gen(501);
    for (long q : {5L, 7L, 11L, 13L, 101L}) {
        for (int trial = 0; trial < 50; ++trial) {
            const long p = non_multiple(gen, q, 1, 10 * q);
            const long N = non_multiple(gen, q, -1000, 1000);
            const long j = gen.integer(-50, 50);
            const auto r = gauss_partial_sum(p, q, 0.5, N, j, q);
            CHECK(std::abs(r.magnitude_squared - static_cast<double>(q)) < 1e-9 * static_cast<double>(q));
        }
    }
}

TEST_CASE("property: multiples of q give T squared") {
    Gen gen(502);
    for (int trial = 0; trial < 200; ++trial) {
        const long q = gen.pick(primes_to_101());
        const long p = non_multiple(gen, q, 1, 10 * q);
        const long T = gen.integer(1, q);
        const long N = q * gen.integer(-20, 20);
        const auto r = gauss_partial_sum(p, q, 0.5, N, gen.integer(-50, 50), T);
        CHECK(std::abs(r.magnitude_squared - static_cast<double>(T * T)) < 1e-9 * static_cast<double>(T * T));
    }
}

TEST_CASE("property: partial sums stay under 2q(1 + log q)") {
    Gen gen(503);
    std::vector<long> odd(primes_to_101().begin() + 1, primes_to_101().end());
    for (int trial = 0; trial < 500; ++trial) {
        const long q = gen.pick(odd);
        const long p = non_multiple(gen, q, 1, 10 * q);
        const long N = non_multiple(gen, q, -1000, 1000);
        const long T = gen.integer(1, q);
        const auto r = gauss_partial_sum(p, q, 0.5, N, gen.integer(-50, 50), T);
        CHECK(r.magnitude_squared <= 2.0 * static_cast<double>(q) * (1.0 + std::log(static_cast<double>(q))));
        CHECK(r.satisfied);
    }
}

TEST_CASE("full-period identity fails for q = 2") {
    // The two terms at beta = 1/2 cancel exactly, so |S|^2 = 0, not q.
    const auto r = gauss_partial_sum(1, 2, 0.5, 1, 1, 2);
    CHECK(r.gauss_case == GaussCase::FullPeriod);
    CHECK(r.magnitude_squared < 1e-20);
    CHECK_FALSE(r.satisfied);
}

TEST_CASE("fourier coefficients of log|1 - rho e^{i phi}|") {
    CHECK(fourier_log_coeff(0, 0.9) == 0.0);
    CHECK(fourier_log_coeff(1, 0.5) == -0.5);
    CHECK(fourier_log_coeff(-2, 0.5) == doctest::Approx(-0.125));
    CHECK_THROWS_AS(fourier_log_coeff(1, 1.0), InvalidInput);
    CHECK_THROWS_AS(fourier_log_coeff(1, 0.0), InvalidInput);

    // The one-sided series gives log|1 - rho e^{i phi}|; summed over all
    // N != 0 the same coefficients give twice that.
    const double rho = 0.9, phi = pi / 3;
    double one_sided = 0.0, two_sided = 0.0;
    for (long N = 1; N <= 10000; ++N) {
        one_sided += fourier_log_coeff(N, rho) * std::cos(static_cast<double>(N) * phi);
        for (long s : {N, -N}) two_sided += (fourier_log_coeff(s, rho) * std::polar(1.0, static_cast<double>(s) * phi)).real();
    }
    const double target = std::log(std::abs(1.0 - std::polar(rho, phi)));
    CHECK(std::abs(one_sided - target) < 1e-8);
    CHECK(std::abs(two_sided - 2.0 * target) < 1e-8);
}

TEST_CASE("log diagonal product for q = 3") {
    // One factor, |a_2 conj(a_1) - 1|; reference tests/oracles/oracle.py.
    const auto params = primitive_resonance(1, 3, 0.5);
    const auto r = log_diagonal_product(params, 1);
    CHECK(r.sum == doctest::Approx(0.54930614433405485).epsilon(1e-12));
    const auto a = unperturbed_eigenvalues(params).a;
    CHECK(r.sum == doctest::Approx(std::log(std::abs(a[1] * std::conj(a[0]) - 1.0))).epsilon(1e-12));
    const double q = 3.0;
    CHECK(r.bound_ratio == doctest::Approx(std::abs(r.sum) / std::sqrt(q * std::pow(std::log(q), 3))));
}

TEST_CASE("log diagonal product preconditions") {
    CHECK_THROWS_AS(log_diagonal_product(primitive_resonance(1, 9, 0.5), 1), UnsupportedParams);
    CHECK_THROWS_AS(log_diagonal_product(primitive_resonance(1, 4, resonant_beta(1, 4, 0)), 1), UnsupportedParams);
}

TEST_CASE("property: regularized product stays within its error bound") {
    for (long q = 5; q < 200; q += 2) {
        if (!is_prime(q)) continue;
        const auto params = primitive_resonance(1, q, 0.5);
        const double lq = std::log(static_cast<double>(q));
        const double gap = 1.0 / (static_cast<double>(q) * lq);
        const double rho = 1.0 - gap;
        const double direct = log_diagonal_product(params, 1).sum;
        const double reg = log_diagonal_product_regularized(params, 1, rho);
        // Same factors evaluated in closed form.
        const auto a = unperturbed_eigenvalues(params).a;
        const auto path = canonical_path(1, q);
        double closed = 0.0;
        for (std::size_t l = 1; l + 1 < path.sites.size(); ++l)
            closed += std::log(std::abs(rho * a[path.sites[l] - 1] * std::conj(a[0]) - 1.0));
        CAPTURE(q);
        CHECK(std::abs(reg - closed) < 1e-10 * std::max(1.0, std::abs(closed)));
        CHECK(std::abs(reg - direct) < 16.0 * static_cast<double>(q) * gap * std::log(2.0 * static_cast<double>(q)));
    }
}

TEST_CASE("log cos integral") {
    CHECK(log_cos_integral(0.0) == 0.0);
    // Small-x expansion: F(x) = -pi^2 x^3 / 96 - pi^4 x^5 / 15360 + ...
    const double x = 0.01;
    const double series = -pi * pi * x * x * x / 96 - std::pow(pi, 4) * std::pow(x, 5) / 15360;
    CHECK(log_cos_integral(x) == doctest::Approx(series).epsilon(1e-8));
}

TEST_CASE("gamma bound") {
    // Reference: tests/oracles/oracle.py (mpmath quad + root of dF/dx).
    const auto g = gamma_bound(4000);
    CHECK(g.value == doctest::Approx(-0.0015673243557214466).epsilon(1e-8));
    CHECK(g.x_star == doctest::Approx(0.24533020750812006).epsilon(1e-6));
    CHECK(g.lambda_star == doctest::Approx(0.25));
    CHECK(g.value < 0.0);
    CHECK(g.value >= -0.0020);
    CHECK(g.value <= -0.0013);
    CHECK(g.x_star >= 0.0);
    CHECK(g.x_star <= 1.0);
    CHECK_THROWS_AS(gamma_bound(999), InvalidInput);
}

TEST_CASE("gamma bound is stable under refinement") {
    const auto coarse = gamma_bound(1000);
    const auto fine = gamma_bound(4000);
    CHECK(std::abs(coarse.value - fine.value) < 1e-5);
}

TEST_CASE("decay fit") {
    // Reference: tests/oracles/oracle.py, polyfit of log|s_1| over q.
    const std::vector<long> qs{3, 5, 7, 11, 13};
    const auto f = decay_fit([](long) { return 1L; }, qs);
    CHECK(f.rate == doctest::Approx(-1.87494954589644).epsilon(1e-9));
    CHECK(f.magnitude.size() == 5);
    CHECK(f.magnitude[4] == doctest::Approx(2.3199460189378988e-10).epsilon(1e-12));
    const std::vector<long> one{7};
    CHECK_THROWS_AS(decay_fit([](long) { return 1L; }, one), InsufficientData);
    const std::vector<long> repeated{3, 3, 5, 5, 7};
    CHECK_THROWS_AS(decay_fit([](long) { return 1L; }, repeated), InsufficientData);
}

TEST_CASE("least squares") {
    const std::vector<double> x{0, 1, 2, 3};
    const std::vector<double> y{1, 3, 5, 7};
    const auto f = least_squares(x, y);
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.residual_rms < 1e-12);
    const std::vector<double> flat{1, 1, 1, 1};
    CHECK_THROWS_AS(least_squares(flat, y), InsufficientData);
}

}

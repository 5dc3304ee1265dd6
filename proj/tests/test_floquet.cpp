#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "generators.hpp"
#include "rotor/errors.hpp"
#include "rotor/floquet.hpp"
#include "rotor/spectrum.hpp"

using namespace rotor;
using rotor::testing::Gen;
using std::numbers::pi;

namespace {

/// Largest distance between two spectra after sorting both by phase.
double spectrum_gap(const UnitaryMatrix& a, const UnitaryMatrix& b) {
    auto pa = eigenphases(a).phases();
    auto pb = eigenphases(b).phases();
    double worst = 0.0;
    // Match greedily on the circle so branch-cut neighbours pair up.
    std::vector<bool> used(pb.size(), false);
    for (double x : pa) {
        std::size_t best = 0;
        double d = 1e9;
        for (std::size_t k = 0; k < pb.size(); ++k) {
            if (used[k]) continue;
            const double e = phase_distance(x, pb[k]);
            if (e < d) {
                d = e;
                best = k;
            }
        }
        used[best] = true;
        worst = std::max(worst, d);
    }
    return worst;
}

} // namespace

TEST_SUITE("floquet") {

TEST_CASE("anti-resonance G is the swap matrix") {
    const auto g = build_G(validate_resonance(2, 2, 0.0, 0)).matrix();
    CHECK(std::abs(g(0, 0)) < 1e-15);
    CHECK(std::abs(g(1, 1)) < 1e-15);
    CHECK(std::abs(g(0, 1) - 1.0) < 1e-15);
    CHECK(std::abs(g(1, 0) - 1.0) < 1e-15);
}

TEST_CASE("q = 1 G is the single eigenvalue") {
    const auto params = primitive_resonance(1, 1, 0.5);
    const auto g = build_G(params).matrix();
    REQUIRE(g.rows() == 1);
    CHECK(std::abs(g(0, 0) - unperturbed_eigenvalues(params).a[0]) < 1e-15);
}

TEST_CASE("q = 1 S closed form") {
    const auto params = primitive_resonance(1, 1, 0.5).with_kick(0.8);
    for (double t : {0.0, 1.0, 2.5, 6.0}) {
        const auto s = build_S(params, t).matrix();
        const Complex expect = std::exp(Complex(0, -pi * 0.25)) * std::exp(Complex(0, -0.8 * std::cos(t)));
        CHECK(std::abs(s(0, 0) - expect) < 1e-14);
    }
}

TEST_CASE("anti-resonance S has eigenvalues +1 and -1") {
    Gen gen(201);
    for (int trial = 0; trial < 20; ++trial) {
        const auto params = validate_resonance(2, 2, 0.0, 0).with_kick(gen.real(0.0, 5.0));
        const auto sol = eigenphases(build_S(params, gen.real(0.0, pi)));
        std::vector<double> re{sol.eigenvalues[0].real(), sol.eigenvalues[1].real()};
        std::sort(re.begin(), re.end());
        CHECK(std::abs(sol.eigenvalues[0].imag()) < 1e-12);
        CHECK(re[0] == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(re[1] == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("mu = 0 gives S = G and X = C exactly") {
    for (long q : {1L, 2L, 3L, 5L, 8L, 13L}) {
        const auto params = primitive_resonance(1, q, resonant_beta(1, q, 0));
        const auto g = build_G(params).matrix();
        for (double t : {0.0, 0.3, 1.1}) CHECK((build_S(params, t).matrix() - g).cwiseAbs().maxCoeff() == 0.0);
    }
    for (long q : {1L, 3L, 5L, 7L}) {
        const auto params = primitive_resonance(2 % q == 0 ? 1 : 2, q, 0.5);
        const auto c = build_C(params).matrix();
        CHECK((build_X(params, 0.9).matrix() - c).cwiseAbs().maxCoeff() == 0.0);
        for (long j = 1; j <= q; ++j) {
            const double ph = -pi * static_cast<double>(params.p) * (j - 0.5) * (j - 0.5) / static_cast<double>(q);
            CHECK(std::abs(c(j - 1, j - 1) - std::exp(Complex(0, ph))) < 1e-14);
        }
    }
}

TEST_CASE("hopping matrix at theta = 0 has eigenvalues cos(2 pi k / q)") {
    for (long q : {3L, 4L, 7L}) {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(hopping_matrix(q, 0.0));
        std::vector<double> expect;
        for (long k = 0; k < q; ++k) expect.push_back(std::cos(2 * pi * static_cast<double>(k) / static_cast<double>(q)));
        std::sort(expect.begin(), expect.end());
        for (long k = 0; k < q; ++k) CHECK(es.eigenvalues()(k) == doctest::Approx(expect[k]).epsilon(1e-13));
    }
}

TEST_CASE("build_X needs a primitive resonance at beta = 1/2") {
    CHECK_THROWS_AS(build_X(validate_resonance(2, 2, 0.0, 0), 0.0), UnsupportedParams);
    CHECK_THROWS_AS(build_X(primitive_resonance(1, 4, 0.0), 0.0), UnsupportedParams);
}

TEST_CASE("property: constructed matrices are unitary") {
    Gen gen(202);
    for (int trial = 0; trial < 100; ++trial) {
        const long q = gen.integer(1, 25);
        const long p = gen.coprime(q);
        const auto params = primitive_resonance(p, q, resonant_beta(p, q, 0)).with_kick(gen.real(0.0, 3.0));
        CHECK(build_G(params).defect() < 1e-12);
        CHECK(build_S(params, gen.real(0.0, 2 * pi / static_cast<double>(q))).defect() < 1e-12);
        CHECK(std::abs(std::abs(build_G(params).matrix().determinant()) - 1.0) < 1e-12);
        if (q % 2 == 1) {
            const auto half = primitive_resonance(p, q, 0.5).with_kick(gen.real(0.0, 3.0));
            CHECK(build_X(half, gen.real(0.0, 2 * pi)).defect() < 1e-12);
            CHECK(build_C(half).defect() < 1e-12);
        }
    }
}

TEST_CASE("property: spectrum of G is the unperturbed spectrum") {
    Gen gen(203);
    for (int trial = 0; trial < 50; ++trial) {
        const long Q = gen.integer(1, 30);
        const long P = gen.integer(1, 10);
        const long nu = gen.integer(0, P - 1);
        const auto params = validate_resonance(P, Q, resonant_beta(P, Q, nu), nu);
        const auto sol = eigenphases(build_G(params));
        auto got = sol.phases();
        auto want = unperturbed_eigenvalues(params).phase;
        std::vector<bool> used(want.size(), false);
        for (double x : got) {
            double best = 1e9;
            std::size_t k_best = 0;
            for (std::size_t k = 0; k < want.size(); ++k) {
                if (!used[k] && phase_distance(x, want[k]) < best) {
                    best = phase_distance(x, want[k]);
                    k_best = k;
                }
            }
            used[k_best] = true;
            CHECK(best < 1e-12);
        }
    }
}

TEST_CASE("property: X(q vartheta) and S(vartheta) share a spectrum") {
    Gen gen(204);
    for (long q : {1L, 3L, 5L, 7L, 11L}) {
        for (int trial = 0; trial < 20; ++trial) {
            const long p = gen.coprime(q);
            const double mu = gen.real(0.0, 3.0);
            const double vt = gen.real(0.0, 2 * pi / static_cast<double>(q));
            const auto params = primitive_resonance(p, q, 0.5).with_kick(mu);
            CHECK(spectrum_gap(build_X(params, static_cast<double>(q) * vt), build_S(params, vt)) < 1e-10);
        }
    }
}

TEST_CASE("property: X is 2 pi periodic in theta") {
    Gen gen(205);
    for (int trial = 0; trial < 30; ++trial) {
        const long q = gen.pick(std::vector<long>{3, 5, 7, 9});
        const auto params = primitive_resonance(gen.coprime(q), q, 0.5).with_kick(gen.real(0.0, 2.0));
        const double t = gen.real(0.0, 2 * pi);
        CHECK((build_X(params, t).matrix() - build_X(params, t + 2 * pi).matrix()).cwiseAbs().maxCoeff() < 1e-13);
    }
}

TEST_CASE("direct integral decomposition") {
    const auto anti = validate_resonance(2, 2, 0.0, 0).with_kick(1.3);
    CHECK(verify_direct_integral(anti, 128, std::nullopt, 7) < 1e-10);

    const auto q3 = primitive_resonance(1, 3, 0.5).with_kick(1.0);
    CHECK(verify_direct_integral(q3, 192, std::nullopt, 7) < 1e-10);

    Gen gen(206);
    for (int trial = 0; trial < 5; ++trial) {
        const long P = gen.integer(1, 5);
        const long Q = gen.integer(1, 8);
        const auto free = validate_resonance(P, Q, resonant_beta(P, Q, 0), 0);
        CHECK(verify_direct_integral(free, static_cast<std::size_t>(Q) * 32, std::nullopt,
                                     static_cast<std::uint64_t>(trial)) < 1e-12);
    }
}

TEST_CASE("direct integral rejects grids that Q does not divide") {
    CHECK_THROWS_AS(verify_direct_integral(primitive_resonance(1, 3, 0.5), 128), GridMismatch);
}

TEST_CASE("direct integral with a supplied state is deterministic") {
    const auto params = primitive_resonance(2, 5, 0.5).with_kick(0.7);
    CVector psi = CVector::Zero(160);
    for (Eigen::Index k = 0; k < psi.size(); ++k) psi(k) = std::exp(Complex(0, 0.1 * static_cast<double>(k * k)));
    const double e1 = verify_direct_integral(params, 160, psi);
    const double e2 = verify_direct_integral(params, 160, psi);
    CHECK(e1 == e2);
    CHECK(e1 < 1e-10);
}

}

// Precision-generic matrix builders shared by the double and quad code paths.
#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "rotor/errors.hpp"
#include "rotor/resonance.hpp"

namespace rotor::detail {

template <class Real>
using MatrixC = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

/// a_r phase as an exact multiple of pi when beta is a multiple of 1/2:
/// phase = -pi * num / (4q) with 0 <= num < 8q.
inline std::optional<long long> phase_numerator(long p, long q, double beta, long r)
{
    const double twice_beta = 2.0 * beta;
    if (twice_beta != std::round(twice_beta))
        return std::nullopt;
    const __int128 k = 2 * static_cast<__int128>(r) + static_cast<__int128>(std::llround(twice_beta)) - 2;
    const __int128 m = 8 * static_cast<__int128>(q);
    __int128 n = ((static_cast<__int128>(p) % m) * ((k * k) % m)) % m;
    if (n < 0)
        n += m;
    return static_cast<long long>(n);
}

template <class Real>
Real pi_v()
{
    using std::atan;
    return Real(4) * atan(Real(1));
}

/// exp(i * turns * 2 pi / den) with the angle reduced exactly beforehand.
template <class Real>
std::complex<Real> root_of_unity(long long turns, long long den)
{
    long long t = turns % den;
    if (t < 0)
        t += den;
    using std::cos;
    using std::sin;
    const Real angle = Real(2) * pi_v<Real>() * Real(t) / Real(den);
    return {cos(angle), sin(angle)};
}

template <class Real>
std::complex<Real> unperturbed_value(const ResonanceParams& params, long r)
{
    if (const auto num = phase_numerator(params.p, params.q, params.beta, r))
        return root_of_unity<Real>(-*num, 8 * static_cast<long long>(params.q));
    using std::cos;
    using std::sin;
    const Real ph = Real(unperturbed_phase(params.p, params.q, params.beta, r));
    return {cos(ph), sin(ph)};
}

template <class Real>
MatrixC<Real> make_G(const ResonanceParams& params)
{
    using C = std::complex<Real>;
    const long Q = params.Q;
    std::vector<C> a(static_cast<std::size_t>(Q));
    for (long r = 1; r <= Q; ++r)
        a[static_cast<std::size_t>(r - 1)] = unperturbed_value<Real>(params, r);

    // G is circulant: G_jk depends on (j - k) mod Q only.
    std::vector<C> column(static_cast<std::size_t>(Q));
    for (long d = 0; d < Q; ++d) {
        C acc(0);
        for (long s = 0; s < Q; ++s)
            acc += root_of_unity<Real>(s * d, Q) * a[static_cast<std::size_t>(s)];
        column[static_cast<std::size_t>(d)] = acc / Real(Q);
    }
    MatrixC<Real> g(Q, Q);
    for (long j = 0; j < Q; ++j)
        for (long k = 0; k < Q; ++k)
            g(j, k) = column[static_cast<std::size_t>(((j - k) % Q + Q) % Q)];
    return g;
}

template <class Real>
MatrixC<Real> make_C(const ResonanceParams& params)
{
    MatrixC<Real> c = MatrixC<Real>::Zero(params.q, params.q);
    // (j - 1/2)^2 = (2j - 1)^2 / 4, so the phase is -pi p (2j-1)^2 / (4q).
    for (long j = 1; j <= params.q; ++j) {
        const long long k = 2 * j - 1;
        const long long m = 8 * static_cast<long long>(params.q);
        const long long num = static_cast<long long>((static_cast<__int128>(params.p % m) * ((k * k) % m)) % m);
        c(j - 1, j - 1) = root_of_unity<Real>(-num, m);
    }
    return c;
}

template <class Real>
MatrixC<Real> make_hopping(long q, const Real& theta)
{
    using C = std::complex<Real>;
    using std::cos;
    using std::sin;
    MatrixC<Real> v = MatrixC<Real>::Zero(q, q);
    const Real half(0.5);
    for (long j = 0; j + 1 < q; ++j) {
        v(j, j + 1) += C(half);
        v(j + 1, j) += C(half);
    }
    const C corner(half * cos(theta), half * sin(theta));
    v(0, q - 1) += corner;
    v(q - 1, 0) += std::conj(corner);
    return v;
}

/// exp(-i mu H) for Hermitian H through its eigendecomposition.
template <class Real>
MatrixC<Real> hermitian_exp(const MatrixC<Real>& h, const Real& mu)
{
    using C = std::complex<Real>;
    using std::cos;
    using std::sin;
    Eigen::SelfAdjointEigenSolver<MatrixC<Real>> es(h);
    if (es.info() != Eigen::Success)
        throw ConvergenceFailure("Hermitian eigendecomposition did not converge");
    const auto& ev = es.eigenvalues();
    Eigen::Matrix<C, Eigen::Dynamic, 1> phases(ev.size());
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        const Real x = -mu * ev(k);
        phases(k) = C(cos(x), sin(x));
    }
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

inline void require_ring_form(const ResonanceParams& params)
{
    if (!params.primitive || params.Q != params.q)
        throw UnsupportedParams("ring form X(theta, mu) requires a primitive resonance (Q = q)");
    if (params.beta != 0.5)
        throw UnsupportedParams("ring form X(theta, mu) is defined for beta = 1/2 only; use S(vartheta, mu)");
}

} // namespace rotor::detail

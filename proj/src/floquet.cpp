#include "rotor/floquet.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "builders.hpp"
#include "rotor/errors.hpp"

namespace rotor {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_finite(double angle)
{
    if (!std::isfinite(angle))
        throw InvalidInput("Bloch angle must be finite");
}

/// exp(-i tau (n + beta)^2 / 2) = exp(-i pi (P/Q) (n + beta)^2), reduced mod 2 pi
/// through P (n + beta)^2 mod 2Q before scaling.
Complex kinetic_phase(const ResonanceParams& params, long n)
{
    const long double x = static_cast<long double>(n) + static_cast<long double>(params.beta);
    const long double reduced = std::fmod(static_cast<long double>(params.P) * x * x,
                                          2.0L * static_cast<long double>(params.Q));
    const long double angle = -std::numbers::pi_v<long double> * reduced / static_cast<long double>(params.Q);
    return std::polar(1.0, static_cast<double>(angle));
}

} // namespace

UnitaryMatrix build_G(const ResonanceParams& params)
{
    return UnitaryMatrix(detail::make_G<double>(params));
}

UnitaryMatrix build_S(const ResonanceParams& params, double vartheta)
{
    require_finite(vartheta);
    CMatrix s = detail::make_G<double>(params);
    if (params.mu != 0.0) {
        const double Q = static_cast<double>(params.Q);
        for (long j = 0; j < params.Q; ++j) {
            const double angle = vartheta + kTwoPi * static_cast<double>(j) / Q;
            s.row(j) *= std::polar(1.0, -params.mu * std::cos(angle));
        }
    }
    return UnitaryMatrix(std::move(s));
}

UnitaryMatrix build_C(const ResonanceParams& params)
{
    detail::require_ring_form(params);
    return UnitaryMatrix(detail::make_C<double>(params));
}

CMatrix hopping_matrix(long q, double theta)
{
    if (q < 1)
        throw InvalidInput("ring size must be positive");
    require_finite(theta);
    return detail::make_hopping<double>(q, theta);
}

UnitaryMatrix build_X(const ResonanceParams& params, double theta)
{
    detail::require_ring_form(params);
    require_finite(theta);
    const CMatrix c = detail::make_C<double>(params);
    if (params.mu == 0.0)
        return UnitaryMatrix(c);
    const CMatrix kick = detail::hermitian_exp<double>(detail::make_hopping<double>(params.q, theta), params.mu);
    return UnitaryMatrix(c * kick);
}

double verify_direct_integral(const ResonanceParams& params, std::size_t grid_points,
                              const std::optional<CVector>& psi, std::uint64_t seed)
{
    const auto Q = static_cast<std::size_t>(params.Q);
    if (grid_points == 0 || grid_points % Q != 0)
        throw GridMismatch("grid_points=" + std::to_string(grid_points) + " is not a positive multiple of Q=" +
                           std::to_string(Q));
    const std::size_t n = grid_points;

    CVector state;
    if (psi) {
        if (static_cast<std::size_t>(psi->size()) != n)
            throw GridMismatch("state length differs from grid_points");
        state = *psi;
    } else {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, std::numbers::sqrt2 / 2.0);
        state.resize(static_cast<Eigen::Index>(n));
        for (std::size_t k = 0; k < n; ++k)
            state(static_cast<Eigen::Index>(k)) = Complex(normal(rng), normal(rng));
    }

    // Route 1: full angle grid. Free rotation on the plane-wave amplitudes
    // (momenta in a symmetric window), then the kick pointwise in angle.
    std::vector<Complex> twiddle(n);
    for (std::size_t k = 0; k < n; ++k)
        twiddle[k] = std::polar(1.0, kTwoPi * static_cast<double>(k) / static_cast<double>(n));
    const long lo = -static_cast<long>(n / 2);

    std::vector<Complex> amp(n);
    for (std::size_t m = 0; m < n; ++m) {
        const long mom = lo + static_cast<long>(m);
        const std::size_t mm = static_cast<std::size_t>(((mom % static_cast<long>(n)) + static_cast<long>(n)) %
                                                        static_cast<long>(n));
        Complex acc(0.0);
        for (std::size_t k = 0; k < n; ++k)
            acc += state(static_cast<Eigen::Index>(k)) * std::conj(twiddle[(mm * k) % n]);
        amp[m] = acc / static_cast<double>(n) * kinetic_phase(params, mom);
    }
    std::vector<Complex> full(n);
    for (std::size_t k = 0; k < n; ++k) {
        Complex acc(0.0);
        for (std::size_t m = 0; m < n; ++m) {
            const long mom = lo + static_cast<long>(m);
            const std::size_t mm = static_cast<std::size_t>(((mom % static_cast<long>(n)) + static_cast<long>(n)) %
                                                            static_cast<long>(n));
            acc += amp[m] * twiddle[(mm * k) % n];
        }
        const double angle = kTwoPi * static_cast<double>(k) / static_cast<double>(n);
        full[k] = acc * std::polar(1.0, -params.mu * std::cos(angle));
    }

    // Route 2: fibre decomposition, (b psi)_j(vartheta) = psi(vartheta + 2 pi (j-1)/Q).
    const std::size_t stride = n / Q;
    double worst = 0.0;
    for (std::size_t m = 0; m < stride; ++m) {
        const double vartheta = kTwoPi * static_cast<double>(m) / static_cast<double>(n);
        CVector fibre(static_cast<Eigen::Index>(Q));
        for (std::size_t j = 0; j < Q; ++j)
            fibre(static_cast<Eigen::Index>(j)) = state(static_cast<Eigen::Index>(m + j * stride));
        const CVector out = build_S(params, vartheta).matrix() * fibre;
        for (std::size_t j = 0; j < Q; ++j)
            worst = std::max(worst, std::abs(out(static_cast<Eigen::Index>(j)) - full[m + j * stride]));
    }
    return worst;
}

} // namespace rotor
